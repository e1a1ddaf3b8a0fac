#pragma once

#include <vector>

namespace tsgan {

// A fixed-length univariate sequence. Class labels travel alongside
// (see Dataset) rather than inside the value vector.
using Series = std::vector<double>;

} // namespace tsgan
