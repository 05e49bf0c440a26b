#include "reachkit/network.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace reachkit {

using nlohmann::json;

Network::Network(std::size_t input_dim, std::vector<std::vector<Node>> layers)
    : input_dim_(input_dim), layers_(std::move(layers)) {
    if (input_dim_ == 0) throw std::invalid_argument("network input dimension must be positive");
    if (layers_.empty()) throw std::invalid_argument("network needs at least one stored layer");
    std::size_t prev = input_dim_;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        if (layers_[l].empty()) throw std::invalid_argument("empty network layer");
        for (const Node& node : layers_[l])
            if (node.weights.size() != prev)
                throw std::invalid_argument("node weight count does not match previous layer width");
        prev = layers_[l].size();
    }
}

std::size_t Network::node_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers_) n += layer.size();
    return n;
}

std::vector<RatVec> Network::eval_layers(const RatVec& input) const {
    if (input.size() != input_dim_)
        throw std::invalid_argument("network input dimension mismatch");
    std::vector<RatVec> values;
    values.reserve(layers_.size());
    const RatVec* prev = &input;
    for (const auto& layer : layers_) {
        RatVec out;
        out.reserve(layer.size());
        for (const Node& node : layer) {
            Rational pre = node.bias;
            for (std::size_t j = 0; j < node.weights.size(); ++j) {
                if (node.weights[j] != 0) pre += node.weights[j] * (*prev)[j];
            }
            out.push_back(node.activation.eval(pre));
        }
        values.push_back(std::move(out));
        prev = &values.back();
    }
    return values;
}

RatVec Network::eval(const RatVec& input) const { return eval_layers(input).back(); }

RatVec Network::weight_alphabet() const {
    std::set<Rational> values;
    for (const auto& layer : layers_)
        for (const Node& node : layer) {
            for (const auto& w : node.weights) values.insert(w);
            values.insert(node.bias);
        }
    return RatVec(values.begin(), values.end());
}

namespace {

json activation_to_json(const PWLFunction& f) {
    if (f.is_relu()) return "relu";
    if (f.is_identity()) return "id";
    json pieces = json::array();
    for (const auto& [a, b] : f.pieces()) pieces.push_back({to_string(a), to_string(b)});
    json breakpoints = json::array();
    for (const auto& t : f.breakpoints()) breakpoints.push_back(to_string(t));
    return {{"pieces", pieces}, {"breakpoints", breakpoints}};
}

PWLFunction activation_from_json(const json& j) {
    if (j.is_string()) {
        const std::string name = j.get<std::string>();
        if (name == "relu") return PWLFunction::relu();
        if (name == "id") return PWLFunction::identity();
        throw std::invalid_argument("unknown activation name: " + name);
    }
    std::vector<PWLFunction::Piece> pieces;
    for (const auto& p : j.at("pieces"))
        pieces.emplace_back(parse_rational(p.at(0).get<std::string>()),
                            parse_rational(p.at(1).get<std::string>()));
    RatVec breakpoints;
    for (const auto& t : j.at("breakpoints")) breakpoints.push_back(parse_rational(t.get<std::string>()));
    return PWLFunction(std::move(pieces), std::move(breakpoints));
}

}  // namespace

std::string Network::to_json() const {
    json layers = json::array();
    for (const auto& layer : layers_) {
        json nodes = json::array();
        for (const Node& node : layer) {
            json weights = json::array();
            for (const auto& w : node.weights) weights.push_back(to_string(w));
            nodes.push_back({{"weights", weights},
                             {"bias", to_string(node.bias)},
                             {"activation", activation_to_json(node.activation)}});
        }
        layers.push_back(nodes);
    }
    json j = {{"input_dim", input_dim_}, {"layers", layers}};
    return j.dump(2);
}

Network Network::from_json(const std::string& text) {
    json j = json::parse(text);
    std::size_t input_dim = j.at("input_dim").get<std::size_t>();
    std::vector<std::vector<Node>> layers;
    for (const auto& layer : j.at("layers")) {
        std::vector<Node> nodes;
        for (const auto& n : layer) {
            Node node{{}, rat(0), activation_from_json(n.at("activation"))};
            for (const auto& w : n.at("weights")) node.weights.push_back(parse_rational(w.get<std::string>()));
            node.bias = parse_rational(n.at("bias").get<std::string>());
            nodes.push_back(std::move(node));
        }
        layers.push_back(std::move(nodes));
    }
    return Network(input_dim, std::move(layers));
}

Network Network::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open network file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

void Network::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write network file: " + path);
    out << to_json() << "\n";
}

std::size_t Network::size_bits() const {
    std::size_t bits = 0;
    for (const auto& layer : layers_)
        for (const Node& node : layer) {
            bits += vector_bits(node.weights);
            bits += rational_bits(node.bias);
            for (const auto& [a, b] : node.activation.pieces())
                bits += rational_bits(a) + rational_bits(b);
            bits += vector_bits(node.activation.breakpoints());
        }
    return bits;
}

}  // namespace reachkit
