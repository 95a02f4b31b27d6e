#pragma once

#include <fstream>
#include <string>

namespace freqcross {

// Numeric formatting for CSV artifacts: %.12g round-trips to ~1e-12 relative
// while staying readable.
std::string csv_num(double v);

// Open a file for writing or raise IoFailure.
std::ofstream open_out(const std::string& path);

// Flush and verify the stream; raises IoFailure naming the path.
void close_out(std::ofstream& out, const std::string& path);

}  // namespace freqcross
