#pragma once

#include <cstdint>
#include <cstddef>

namespace freqcross {

// CRC-32 (IEEE, reflected, poly 0xEDB88320), as used by zip/png.
uint32_t crc32(const void* data, size_t length, uint32_t seed = 0);

}  // namespace freqcross
