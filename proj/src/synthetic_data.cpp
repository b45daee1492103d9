#include "deal/synthetic_data.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "deal/random.hpp"

namespace deal {

Dataset make_two_gaussians(std::size_t count, double separation, std::size_t dims, std::uint64_t seed) {
    if (dims < 1) throw std::invalid_argument("need at least one dimension");
    Rng rng = make_rng(seed, 0x9a55);
    Dataset d;
    d.class_names = {"-1", "+1"};
    d.features = Matrix(count, dims);
    for (std::size_t i = 0; i < count; ++i) {
        const int label = static_cast<int>(i % 2);
        d.labels.push_back(label);
        for (std::size_t j = 0; j < dims; ++j) d.features(i, j) = standard_normal(rng);
        d.features(i, 0) += (label == 1 ? 0.5 : -0.5) * separation;
    }
    return d;
}

Dataset make_moons(std::size_t count, double noise, std::uint64_t seed) {
    Rng rng = make_rng(seed, 0x3005);
    Dataset d;
    d.class_names = {"0", "1"};
    d.features = Matrix(count, 2);
    for (std::size_t i = 0; i < count; ++i) {
        const int label = static_cast<int>(i % 2);
        const double angle = std::numbers::pi * uniform01(rng);
        double x = std::cos(angle), y = std::sin(angle);
        if (label == 1) {
            x = 1.0 - x;
            y = 0.5 - y;
        }
        d.labels.push_back(label);
        d.features(i, 0) = x + noise * standard_normal(rng);
        d.features(i, 1) = y + noise * standard_normal(rng);
    }
    return d;
}

Dataset make_named_dataset(const std::string& spec, std::uint64_t seed) {
    std::string name = spec;
    std::size_t count = 300;
    if (auto colon = spec.find(':'); colon != std::string::npos) {
        name = spec.substr(0, colon);
        count = std::stoul(spec.substr(colon + 1));
    }
    if (name == "separable") return make_two_gaussians(count, 4.0, 2, seed);
    if (name == "overlapping") return make_two_gaussians(count, 1.5, 2, seed);
    if (name == "moons") return make_moons(count, 0.2, seed);
    throw std::invalid_argument("unknown synthetic dataset '" + name + "'");
}

}  // namespace deal
