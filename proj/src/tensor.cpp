#include "wind/tensor.hpp"

#include <cmath>

namespace wind {

double tensor_mean(const LatentTensor& t) {
    double s = 0.0;
    for (float v : t.data) s += v;
    return t.data.empty() ? 0.0 : s / double(t.data.size());
}

double tensor_std(const LatentTensor& t) {
    if (t.data.empty()) return 0.0;
    double mu = tensor_mean(t);
    double s = 0.0;
    for (float v : t.data) {
        double d = v - mu;
        s += d * d;
    }
    return std::sqrt(s / double(t.data.size()));
}

bool tensor_finite(const LatentTensor& t) {
    for (float v : t.data)
        if (!std::isfinite(v)) return false;
    return true;
}


double tensor_dot(const LatentTensor& a, const LatentTensor& b) {
    require_same_shape(a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) s += double(a.data[i]) * double(b.data[i]);
    return s;
}

double tensor_norm(const LatentTensor& t) {
    double s = 0.0;
    for (float v : t.data) s += double(v) * double(v);
    return std::sqrt(s);
}

double tensor_cosine(const LatentTensor& a, const LatentTensor& b) {
    double na = tensor_norm(a);
    double nb = tensor_norm(b);
    if (na == 0.0 || nb == 0.0) throw std::invalid_argument("cosine: zero-norm input");
    return tensor_dot(a, b) / (na * nb);
}

double tensor_l2(const LatentTensor& a, const LatentTensor& b) {
    require_same_shape(a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        double d = double(a.data[i]) - double(b.data[i]);
        s += d * d;
    }
    return std::sqrt(s);
}

} // namespace wind
