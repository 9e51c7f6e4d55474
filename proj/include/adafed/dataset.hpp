#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace adafed {

// Row-major sample matrix plus one label per row. Labels hold class indices
// for classification tasks (stored as doubles) and real targets for
// regression; the model kind decides the interpretation.
struct Dataset {
    int feature_dim = 0;
    std::vector<double> features;  // size() == n * feature_dim
    std::vector<double> labels;    // size() == n

    int size() const {
        return feature_dim == 0 ? 0 : static_cast<int>(features.size()) / feature_dim;
    }

    std::span<const double> row(int i) const {
        return {features.data() + static_cast<std::size_t>(i) * feature_dim,
                static_cast<std::size_t>(feature_dim)};
    }

    void push_row(std::span<const double> x, double label) {
        features.insert(features.end(), x.begin(), x.end());
        labels.push_back(label);
    }
};

}  // namespace adafed
