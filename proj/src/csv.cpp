#include "freqcross/csv.hpp"

#include <cstdio>

#include "freqcross/error.hpp"

namespace freqcross {

std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoFailure, "cannot open " + path + " for writing");
  return out;
}

void close_out(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) fail(ErrorKind::IoFailure, "failed while writing " + path);
  out.close();
}

}  // namespace freqcross
