#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "reachkit/pwl.hpp"
#include "reachkit/rational.hpp"

namespace reachkit {

// One unit of a layer: output = activation(sum_j weights[j] * prev[j] + bias).
// Weights are stored densely; weight 0 means no edge.
struct Node {
    RatVec weights;
    Rational bias;
    PWLFunction activation = PWLFunction::identity();
};

// Feed-forward network over exact rationals. The input layer is implicit;
// layers() holds hidden layers followed by the output layer.
class Network {
public:
    Network(std::size_t input_dim, std::vector<std::vector<Node>> layers);

    std::size_t input_dim() const { return input_dim_; }
    std::size_t output_dim() const { return layers_.back().size(); }
    // Layer count in the input-layer-inclusive sense.
    std::size_t depth() const { return layers_.size() + 1; }
    const std::vector<std::vector<Node>>& layers() const { return layers_; }

    std::size_t node_count() const;

    RatVec eval(const RatVec& input) const;
    // Outputs of every stored layer, in order, for the given input.
    std::vector<RatVec> eval_layers(const RatVec& input) const;

    // Sorted distinct values over all weights (zeros included; the network is
    // dense) and all biases, for alphabet checks.
    RatVec weight_alphabet() const;

    std::string to_json() const;
    static Network from_json(const std::string& text);
    static Network load(const std::string& path);
    void save(const std::string& path) const;

    std::size_t size_bits() const;

private:
    std::size_t input_dim_;
    std::vector<std::vector<Node>> layers_;
};

}  // namespace reachkit
