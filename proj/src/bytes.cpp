#include "freqcross/bytes.hpp"

#include <fstream>
#include <sstream>

namespace freqcross {

std::string read_file_bytes(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) fail(ErrorKind::IoFailure, "cannot open " + path);
  std::ostringstream out;
  out << file.rdbuf();
  if (file.bad()) fail(ErrorKind::IoFailure, "read error on " + path);
  return out.str();
}

void write_file_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) fail(ErrorKind::IoFailure, "cannot open " + path + " for writing");
  file.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!file) fail(ErrorKind::IoFailure, "write error on " + path);
}

}  // namespace freqcross
