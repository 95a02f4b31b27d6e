#include "freqcross/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "freqcross/bytes.hpp"
#include "freqcross/error.hpp"

namespace freqcross {
namespace {

void check_min_side(int h, int w) {
  if (h < kMinImageSide || w < kMinImageSide) {
    fail(ErrorKind::DimensionTooSmall,
         std::to_string(w) + "x" + std::to_string(h) + " is below the minimum " +
             std::to_string(kMinImageSide) + "x" + std::to_string(kMinImageSide));
  }
}

// PPM header fields are whitespace separated; '#' starts a comment to EOL.
int parse_ppm_int(const std::string& bytes, size_t& pos) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
      ++pos;
    } else {
      break;
    }
  }
  if (pos >= bytes.size() || !std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
    fail(ErrorKind::MalformedImage, "bad PPM header field");
  }
  long value = 0;
  while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
    value = value * 10 + (bytes[pos] - '0');
    if (value > 1 << 30) fail(ErrorKind::MalformedImage, "PPM header value out of range");
    ++pos;
  }
  return static_cast<int>(value);
}

ImageRGB decode_ppm(const std::string& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
    if (bytes.size() >= 2 && bytes[0] == 'P') {
      fail(ErrorKind::UnsupportedFormat, "only binary PPM (P6) is supported");
    }
    fail(ErrorKind::MalformedImage, "not a PPM file");
  }
  size_t pos = 2;
  const int w = parse_ppm_int(bytes, pos);
  const int h = parse_ppm_int(bytes, pos);
  const int maxval = parse_ppm_int(bytes, pos);
  if (maxval != 255) fail(ErrorKind::UnsupportedFormat, "PPM maxval must be 255");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    fail(ErrorKind::MalformedImage, "missing whitespace after PPM header");
  }
  ++pos;  // single whitespace byte separates header and pixel data
  if (w <= 0 || h <= 0) fail(ErrorKind::MalformedImage, "non-positive PPM dimensions");
  check_min_side(h, w);
  const size_t need = static_cast<size_t>(w) * h * 3;
  if (bytes.size() - pos < need) fail(ErrorKind::MalformedImage, "truncated PPM pixel data");
  ImageRGB img(h, w);
  for (size_t i = 0; i < need; ++i) {
    img.data[i] = static_cast<unsigned char>(bytes[pos + i]) / 255.0;
  }
  return img;
}

ImageRGB decode_with_opencv(const std::string& bytes) {
  cv::Mat raw(1, static_cast<int>(bytes.size()), CV_8UC1,
              const_cast<char*>(bytes.data()));
  cv::Mat decoded = cv::imdecode(raw, cv::IMREAD_COLOR);  // 8-bit BGR, gray replicated
  if (decoded.empty()) fail(ErrorKind::MalformedImage, "undecodable image bytes");
  check_min_side(decoded.rows, decoded.cols);
  ImageRGB img(decoded.rows, decoded.cols);
  for (int y = 0; y < decoded.rows; ++y) {
    const auto* row = decoded.ptr<cv::Vec3b>(y);
    for (int x = 0; x < decoded.cols; ++x) {
      img.at(y, x, 0) = row[x][2] / 255.0;
      img.at(y, x, 1) = row[x][1] / 255.0;
      img.at(y, x, 2) = row[x][0] / 255.0;
    }
  }
  return img;
}

bool has_png_magic(const std::string& b) {
  static const unsigned char sig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  if (b.size() < 8) return false;
  for (int i = 0; i < 8; ++i) {
    if (static_cast<unsigned char>(b[i]) != sig[i]) return false;
  }
  return true;
}

bool has_jpeg_magic(const std::string& b) {
  return b.size() >= 3 && static_cast<unsigned char>(b[0]) == 0xFF &&
         static_cast<unsigned char>(b[1]) == 0xD8 &&
         static_cast<unsigned char>(b[2]) == 0xFF;
}

}  // namespace

ImageRGB decode_image(const std::string& bytes, ImageFormat format) {
  switch (format) {
    case ImageFormat::kPpm:
      return decode_ppm(bytes);
    case ImageFormat::kPng:
      if (!has_png_magic(bytes)) fail(ErrorKind::MalformedImage, "missing PNG signature");
      return decode_with_opencv(bytes);
    case ImageFormat::kJpeg:
      if (!has_jpeg_magic(bytes)) fail(ErrorKind::MalformedImage, "missing JPEG signature");
      return decode_with_opencv(bytes);
  }
  fail(ErrorKind::UnsupportedFormat, "unknown image format");
}

ImageRGB decode_image_file(const std::string& path) {
  const std::string bytes = read_file_bytes(path);
  if (has_png_magic(bytes)) return decode_image(bytes, ImageFormat::kPng);
  if (has_jpeg_magic(bytes)) return decode_image(bytes, ImageFormat::kJpeg);
  if (bytes.size() >= 2 && bytes[0] == 'P') return decode_image(bytes, ImageFormat::kPpm);
  fail(ErrorKind::UnsupportedFormat, path + ": unrecognized image format");
}

std::string encode_ppm(const ImageRGB& img) {
  std::string out = "P6 " + std::to_string(img.width) + " " +
                    std::to_string(img.height) + " 255\n";
  out.reserve(out.size() + img.data.size());
  for (double v : img.data) {
    const int q = static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
    out.push_back(static_cast<char>(static_cast<unsigned char>(q)));
  }
  return out;
}

void write_ppm_file(const std::string& path, const ImageRGB& img) {
  write_file_bytes(path, encode_ppm(img));
}

ImageRGB resize_bilinear(const ImageRGB& img, int out_h, int out_w) {
  if (out_h < 1 || out_w < 1) {
    fail(ErrorKind::DimensionTooSmall, "resize target must be at least 1x1");
  }
  if (out_h == img.height && out_w == img.width) return img;
  ImageRGB out(out_h, out_w);
  const double scale_y = static_cast<double>(img.height) / out_h;
  const double scale_x = static_cast<double>(img.width) / out_w;
  for (int y = 0; y < out_h; ++y) {
    const double sy = std::clamp((y + 0.5) * scale_y - 0.5, 0.0, img.height - 1.0);
    const int y0 = static_cast<int>(sy);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double fy = sy - y0;
    for (int x = 0; x < out_w; ++x) {
      const double sx = std::clamp((x + 0.5) * scale_x - 0.5, 0.0, img.width - 1.0);
      const int x0 = static_cast<int>(sx);
      const int x1 = std::min(x0 + 1, img.width - 1);
      const double fx = sx - x0;
      for (int c = 0; c < 3; ++c) {
        const double top = img.at(y0, x0, c) * (1 - fx) + img.at(y0, x1, c) * fx;
        const double bot = img.at(y1, x0, c) * (1 - fx) + img.at(y1, x1, c) * fx;
        out.at(y, x, c) = std::clamp(top * (1 - fy) + bot * fy, 0.0, 1.0);
      }
    }
  }
  return out;
}

ImageGray to_grayscale(const ImageRGB& img) {
  ImageGray gray(img.height, img.width);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      gray.at(y, x) =
          0.299 * img.at(y, x, 0) + 0.587 * img.at(y, x, 1) + 0.114 * img.at(y, x, 2);
    }
  }
  return gray;
}

ImageRGB hflip(const ImageRGB& img) {
  ImageRGB out(img.height, img.width);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        out.at(y, x, c) = img.at(y, img.width - 1 - x, c);
      }
    }
  }
  return out;
}

}  // namespace freqcross
