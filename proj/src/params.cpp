#include "apd/params.hpp"

#include "apd/error.hpp"

namespace apd {

Method parse_method(std::string_view name) {
  if (name == "apd") return Method::kApd;
  if (name == "apd-pcl") return Method::kApdPcl;
  throw InvalidInput("unknown method '" + std::string(name) + "', expected apd or apd-pcl");
}

std::string_view method_name(Method method) {
  return method == Method::kApd ? "apd" : "apd-pcl";
}

DetectorParams DetectorParams::apd() { return {}; }

DetectorParams DetectorParams::apd_pcl() {
  DetectorParams p;
  p.st.window = 7;
  p.lo.window = 7;
  return p;
}

DetectorParams DetectorParams::defaults(Method method) {
  return method == Method::kApd ? apd() : apd_pcl();
}

void DetectorParams::validate() const {
  st.validate();
  lo.validate();
  solver.validate();
  pcl.validate();
  if (working_width < 2) throw InvalidInput("working width must be at least 2");
}

}  // namespace apd
