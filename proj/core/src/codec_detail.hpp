#pragma once

#include "trt/bitstream.hpp"

namespace trt::detail {

// Throws corruption unless at most zero padding remains in the reader.
void expect_exhausted(BitReader& r);

}  // namespace trt::detail
