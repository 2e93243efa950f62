#include "glie/tensor.hpp"

#include <cmath>

namespace glie {

bool Tensor::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

} // namespace glie
