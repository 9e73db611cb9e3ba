#include "apd/image_io.hpp"

#include <cmath>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "apd/error.hpp"

namespace apd {

RgbImage read_rgb(const std::filesystem::path& path) {
  const cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw InvalidInput("cannot read image " + path.string());
  RgbImage img(bgr.cols, bgr.rows);
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x) {
      std::uint8_t* px = img.at(x, y);
      px[0] = row[x][2];
      px[1] = row[x][1];
      px[2] = row[x][0];
    }
  }
  return img;
}

SliceMask read_mask(const std::filesystem::path& path) {
  const cv::Mat gray = cv::imread(path.string(), cv::IMREAD_GRAYSCALE);
  if (gray.empty()) throw InvalidInput("cannot read mask " + path.string());
  Grid<std::uint8_t> inside(gray.cols, gray.rows);
  for (int y = 0; y < gray.rows; ++y) {
    const auto* row = gray.ptr<std::uint8_t>(y);
    for (int x = 0; x < gray.cols; ++x) inside(x, y) = row[x] != 0 ? 1 : 0;
  }
  return SliceMask(std::move(inside));
}

void write_png(const RgbImage& img, const std::filesystem::path& path) {
  cv::Mat bgr(img.height(), img.width(), CV_8UC3);
  for (int y = 0; y < img.height(); ++y) {
    auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < img.width(); ++x) {
      const std::uint8_t* px = img.at(x, y);
      row[x] = cv::Vec3b(px[2], px[1], px[0]);
    }
  }
  if (!cv::imwrite(path.string(), bgr)) throw InvalidInput("cannot write " + path.string());
}

void write_mask_png(const SliceMask& mask, const std::filesystem::path& path) {
  cv::Mat gray(mask.height(), mask.width(), CV_8UC1);
  for (int y = 0; y < mask.height(); ++y) {
    auto* row = gray.ptr<std::uint8_t>(y);
    for (int x = 0; x < mask.width(); ++x) row[x] = mask(x, y) ? 255 : 0;
  }
  if (!cv::imwrite(path.string(), gray)) throw InvalidInput("cannot write " + path.string());
}

RgbImage draw_markers(const RgbImage& img, const std::vector<Marker>& markers, int half_size) {
  RgbImage out = img;
  for (const Marker& m : markers) {
    const int cx = static_cast<int>(std::lround(m.at.x));
    const int cy = static_cast<int>(std::lround(m.at.y));
    for (int t = -half_size; t <= half_size; ++t) {
      for (int w = -1; w <= 1; ++w) {
        const int pts[2][2] = {{cx + t, cy + w}, {cx + w, cy + t}};
        for (const auto& p : pts) {
          if (p[0] < 0 || p[1] < 0 || p[0] >= out.width() || p[1] >= out.height()) continue;
          std::uint8_t* px = out.at(p[0], p[1]);
          px[0] = m.r;
          px[1] = m.g;
          px[2] = m.b;
        }
      }
    }
  }
  return out;
}

}  // namespace apd
