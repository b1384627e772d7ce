#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stellagen/rng.hpp"

namespace stellagen {

// Transformer-convention sinusoidal features: pairs [sin(v w_k), cos(v w_k)] with
// geometric frequencies w_k = base^(-2k/dim).
inline Eigen::VectorXd sinusoidal_embed(double v, int dim, double base = 10000.0) {
    if (dim <= 0 || dim % 2 != 0)
        throw std::invalid_argument("sinusoidal_embed: dim must be positive and even");
    Eigen::VectorXd out(dim);
    for (int k = 0; k < dim / 2; ++k) {
        const double w = std::pow(base, -2.0 * k / dim);
        out[2 * k] = std::sin(v * w);
        out[2 * k + 1] = std::cos(v * w);
    }
    return out;
}

struct NetworkConfig {
    int input_dim = 0;    // noised code x_t
    int hidden_width = 2048;
    int hidden_layers = 4;
    int x_embed_dim = 64;
    int t_embed_dim = 128;
    int y_embed_dim = 128;
    int n_conditions = 4;
    int x_sin_dim = 16;   // per-scalar sinusoidal width before the linear mix
    int y_sin_dim = 16;
    int t_sin_dim = 128;
    int output_dim = 0;   // equals input_dim

    void validate() const {
        auto pos = [](int v, const char* name) {
            if (v < 1) throw std::invalid_argument(std::string("NetworkConfig: ") + name +
                                                   " must be positive");
        };
        pos(input_dim, "input_dim");
        pos(hidden_width, "hidden_width");
        pos(hidden_layers, "hidden_layers");
        pos(x_embed_dim, "x_embed_dim");
        pos(t_embed_dim, "t_embed_dim");
        pos(y_embed_dim, "y_embed_dim");
        pos(n_conditions, "n_conditions");
        if (x_sin_dim % 2 || y_sin_dim % 2 || t_sin_dim % 2)
            throw std::invalid_argument("NetworkConfig: sinusoidal dims must be even");
        if (output_dim != input_dim)
            throw std::invalid_argument("NetworkConfig: output_dim must equal input_dim");
    }
    int concat_dim() const { return x_embed_dim + t_embed_dim + y_embed_dim; }
    bool operator==(const NetworkConfig&) const = default;
};

struct TensorSpec {
    std::string name;
    Eigen::Index rows = 0, cols = 0;  // cols == 1 for biases
    Eigen::Index offset = 0;
};

namespace detail {

// Exact GELU (erf form), not the tanh approximation.
inline double gelu(double u) { return 0.5 * u * (1.0 + std::erf(u / std::numbers::sqrt2)); }

inline double gelu_deriv(double u) {
    const double cdf = 0.5 * (1.0 + std::erf(u / std::numbers::sqrt2));
    const double pdf = std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
    return cdf + u * pdf;
}

}  // namespace detail

// f_theta(x_t, t, y): per-scalar sinusoidal heads linearly mixed to the embed
// dims, concatenated, then dense GELU layers and a linear output head. All
// parameters live in one flat vector; the layout table names each tensor.
// Activations flow as row vectors: H_next = H * W + b.
class Network {
  public:
    Network() = default;

    explicit Network(const NetworkConfig& cfg) : cfg_(cfg) {
        cfg_.validate();
        build_layout();
        params_ = Eigen::VectorXd::Zero(n_params_);
    }

    // He fan-in initialization for weights, zero biases; deterministic in seed.
    static Network he_init(const NetworkConfig& cfg, std::uint64_t seed) {
        Network net(cfg);
        Rng rng(derive_seed(seed, 0x1417ULL));
        for (const TensorSpec& t : net.layout_) {
            if (t.cols == 1) continue;  // bias
            const double scale = std::sqrt(2.0 / static_cast<double>(t.rows));
            double* p = net.params_.data() + t.offset;
            for (Eigen::Index k = 0; k < t.rows * t.cols; ++k) p[k] = scale * rng.normal();
        }
        return net;
    }

    const NetworkConfig& config() const { return cfg_; }
    const std::vector<TensorSpec>& layout() const { return layout_; }
    Eigen::Index n_params() const { return n_params_; }
    Eigen::VectorXd& parameters() { return params_; }
    const Eigen::VectorXd& parameters() const { return params_; }

    Eigen::Map<const Eigen::MatrixXd> tensor(std::size_t idx) const {
        const TensorSpec& t = layout_[idx];
        return {params_.data() + t.offset, t.rows, t.cols};
    }
    Eigen::Map<Eigen::MatrixXd> tensor(std::size_t idx) {
        const TensorSpec& t = layout_[idx];
        return {params_.data() + t.offset, t.rows, t.cols};
    }

    // x: batch x input_dim, t: batch (timestep values), y: batch x n_conditions.
    Eigen::MatrixXd forward(const Eigen::MatrixXd& x, const Eigen::VectorXd& t,
                            const Eigen::MatrixXd& y) const {
        Trace tr;
        run_forward(x, t, y, tr);
        return tr.out;
    }

    struct Trace {
        Eigen::MatrixXd sfx, sft, sfy;       // sinusoidal features
        Eigen::MatrixXd h0;                  // concatenated embeddings
        std::vector<Eigen::MatrixXd> z, a;   // pre/post activations per hidden layer
        Eigen::MatrixXd out;
    };

    void run_forward(const Eigen::MatrixXd& x, const Eigen::VectorXd& t,
                     const Eigen::MatrixXd& y, Trace& tr) const {
        const Eigen::Index B = x.rows();
        if (x.cols() != cfg_.input_dim || y.cols() != cfg_.n_conditions || t.size() != B ||
            y.rows() != B)
            throw std::invalid_argument("forward: batch shape mismatch");
        if (!x.allFinite() || !t.allFinite() || !y.allFinite())
            throw std::invalid_argument("forward: non-finite input");

        tr.sfx = sin_features(x, cfg_.x_sin_dim);
        Eigen::MatrixXd tmat(B, 1);
        tmat.col(0) = t;
        tr.sft = sin_features(tmat, cfg_.t_sin_dim);
        tr.sfy = sin_features(y, cfg_.y_sin_dim);

        tr.h0.resize(B, cfg_.concat_dim());
        tr.h0.leftCols(cfg_.x_embed_dim) = affine(tr.sfx, idx_xe_);
        tr.h0.middleCols(cfg_.x_embed_dim, cfg_.t_embed_dim) = affine(tr.sft, idx_te_);
        tr.h0.rightCols(cfg_.y_embed_dim) = affine(tr.sfy, idx_ye_);

        tr.z.resize(cfg_.hidden_layers);
        tr.a.resize(cfg_.hidden_layers);
        const Eigen::MatrixXd* prev = &tr.h0;
        for (int l = 0; l < cfg_.hidden_layers; ++l) {
            tr.z[l] = affine(*prev, idx_hidden_ + 2 * static_cast<std::size_t>(l));
            tr.a[l] = tr.z[l].unaryExpr([](double u) { return detail::gelu(u); });
            prev = &tr.a[l];
        }
        tr.out = affine(*prev, idx_out_);
    }

    static Eigen::MatrixXd sin_features(const Eigen::MatrixXd& vals, int sin_dim) {
        Eigen::VectorXd freq(sin_dim / 2);
        for (int k = 0; k < sin_dim / 2; ++k) freq[k] = std::pow(10000.0, -2.0 * k / sin_dim);
        Eigen::MatrixXd out(vals.rows(), vals.cols() * sin_dim);
        for (Eigen::Index c = 0; c < vals.cols(); ++c)
            for (Eigen::Index r = 0; r < vals.rows(); ++r) {
                const double v = vals(r, c);
                for (int k = 0; k < sin_dim / 2; ++k) {
                    out(r, c * sin_dim + 2 * k) = std::sin(v * freq[k]);
                    out(r, c * sin_dim + 2 * k + 1) = std::cos(v * freq[k]);
                }
            }
        return out;
    }

    std::size_t idx_xe() const { return idx_xe_; }
    std::size_t idx_te() const { return idx_te_; }
    std::size_t idx_ye() const { return idx_ye_; }
    std::size_t idx_hidden() const { return idx_hidden_; }
    std::size_t idx_out() const { return idx_out_; }

  private:
    Eigen::MatrixXd affine(const Eigen::MatrixXd& input, std::size_t w_idx) const {
        return (input * tensor(w_idx)).rowwise() + tensor(w_idx + 1).col(0).transpose();
    }

    void build_layout() {
        layout_.clear();
        Eigen::Index off = 0;
        auto add = [&](const std::string& name, Eigen::Index rows, Eigen::Index cols) {
            layout_.push_back({name, rows, cols, off});
            off += rows * cols;
        };
        idx_xe_ = layout_.size();
        add("x_embed.W", static_cast<Eigen::Index>(cfg_.input_dim) * cfg_.x_sin_dim,
            cfg_.x_embed_dim);
        add("x_embed.b", cfg_.x_embed_dim, 1);
        idx_te_ = layout_.size();
        add("t_embed.W", cfg_.t_sin_dim, cfg_.t_embed_dim);
        add("t_embed.b", cfg_.t_embed_dim, 1);
        idx_ye_ = layout_.size();
        add("y_embed.W", static_cast<Eigen::Index>(cfg_.n_conditions) * cfg_.y_sin_dim,
            cfg_.y_embed_dim);
        add("y_embed.b", cfg_.y_embed_dim, 1);
        idx_hidden_ = layout_.size();
        Eigen::Index prev = cfg_.concat_dim();
        for (int l = 0; l < cfg_.hidden_layers; ++l) {
            add("hidden" + std::to_string(l) + ".W", prev, cfg_.hidden_width);
            add("hidden" + std::to_string(l) + ".b", cfg_.hidden_width, 1);
            prev = cfg_.hidden_width;
        }
        idx_out_ = layout_.size();
        add("out.W", prev, cfg_.output_dim);
        add("out.b", cfg_.output_dim, 1);
        n_params_ = off;
    }

    NetworkConfig cfg_;
    std::vector<TensorSpec> layout_;
    Eigen::VectorXd params_;
    Eigen::Index n_params_ = 0;
    std::size_t idx_xe_ = 0, idx_te_ = 0, idx_ye_ = 0, idx_hidden_ = 0, idx_out_ = 0;
};

struct BackwardResult {
    double loss = 0.0;
    Eigen::VectorXd grad;
};

// Mean-squared-error loss averaged over batch and output dimensions, with exact
// gradients for every parameter.
inline BackwardResult backward(const Network& net, const Eigen::MatrixXd& x,
                               const Eigen::VectorXd& t, const Eigen::MatrixXd& y,
                               const Eigen::MatrixXd& target) {
    if (x.rows() == 0) throw std::invalid_argument("backward: empty batch");
    if (target.rows() != x.rows() || target.cols() != net.config().output_dim)
        throw std::invalid_argument("backward: target shape mismatch");

    Network::Trace tr;
    net.run_forward(x, t, y, tr);

    const double denom = static_cast<double>(x.rows()) * net.config().output_dim;
    Eigen::MatrixXd diff = tr.out - target;
    BackwardResult res;
    res.loss = diff.squaredNorm() / denom;
    if (!std::isfinite(res.loss))
        throw std::runtime_error("backward: non-finite loss (batch of " +
                                 std::to_string(x.rows()) + ", |out|_max=" +
                                 std::to_string(tr.out.cwiseAbs().maxCoeff()) + ")");
    res.grad = Eigen::VectorXd::Zero(net.n_params());

    auto grad_tensor = [&](std::size_t idx) {
        const TensorSpec& spec = net.layout()[idx];
        return Eigen::Map<Eigen::MatrixXd>(res.grad.data() + spec.offset, spec.rows, spec.cols);
    };
    // d(affine)/d{W, b, input} for H_next = input*W + b.
    auto backprop_affine = [&](std::size_t w_idx, const Eigen::MatrixXd& input,
                               const Eigen::MatrixXd& gout) -> Eigen::MatrixXd {
        grad_tensor(w_idx) += input.transpose() * gout;
        grad_tensor(w_idx + 1).col(0) += gout.colwise().sum().transpose();
        return gout * net.tensor(w_idx).transpose();
    };

    Eigen::MatrixXd g = (2.0 / denom) * diff;
    const int L = net.config().hidden_layers;
    const Eigen::MatrixXd& last = L > 0 ? tr.a[static_cast<std::size_t>(L - 1)] : tr.h0;
    g = backprop_affine(net.idx_out(), last, g);
    for (int l = L - 1; l >= 0; --l) {
        g = g.cwiseProduct(tr.z[static_cast<std::size_t>(l)].unaryExpr(
            [](double u) { return detail::gelu_deriv(u); }));
        const Eigen::MatrixXd& input = l > 0 ? tr.a[static_cast<std::size_t>(l - 1)] : tr.h0;
        g = backprop_affine(net.idx_hidden() + 2 * static_cast<std::size_t>(l), input, g);
    }
    const auto& cfg = net.config();
    backprop_affine(net.idx_xe(), tr.sfx, g.leftCols(cfg.x_embed_dim));
    backprop_affine(net.idx_te(), tr.sft, g.middleCols(cfg.x_embed_dim, cfg.t_embed_dim));
    backprop_affine(net.idx_ye(), tr.sfy, g.rightCols(cfg.y_embed_dim));
    return res;
}

struct AdamState {
    Eigen::VectorXd m, v;
    long step = 0;
    double lr = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static AdamState init(Eigen::Index n_params, double lr_ = 5e-4) {
        AdamState s;
        s.m = Eigen::VectorXd::Zero(n_params);
        s.v = Eigen::VectorXd::Zero(n_params);
        s.lr = lr_;
        return s;
    }
};

inline void adam_step(AdamState& state, Network& net, const Eigen::VectorXd& grad) {
    if (grad.size() != net.n_params() || state.m.size() != net.n_params())
        throw std::invalid_argument("adam_step: shape mismatch");
    state.step += 1;
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad.cwiseAbs2();
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    net.parameters().array() -=
        state.lr * (state.m.array() / bc1) /
        ((state.v.array() / bc2).sqrt() + state.eps);
}

// Checkpoint: config plus every tensor as a row-major nested array keyed by name.
inline nlohmann::json network_to_json(const Network& net) {
    nlohmann::json cfg{{"input_dim", net.config().input_dim},
                       {"hidden_width", net.config().hidden_width},
                       {"hidden_layers", net.config().hidden_layers},
                       {"x_embed_dim", net.config().x_embed_dim},
                       {"t_embed_dim", net.config().t_embed_dim},
                       {"y_embed_dim", net.config().y_embed_dim},
                       {"n_conditions", net.config().n_conditions},
                       {"x_sin_dim", net.config().x_sin_dim},
                       {"y_sin_dim", net.config().y_sin_dim},
                       {"t_sin_dim", net.config().t_sin_dim},
                       {"output_dim", net.config().output_dim}};
    nlohmann::json tensors = nlohmann::json::object();
    for (std::size_t i = 0; i < net.layout().size(); ++i) {
        const TensorSpec& spec = net.layout()[i];
        auto view = net.tensor(i);
        nlohmann::json rows = nlohmann::json::array();
        for (Eigen::Index r = 0; r < spec.rows; ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (Eigen::Index c = 0; c < spec.cols; ++c) row.push_back(view(r, c));
            rows.push_back(std::move(row));
        }
        tensors[spec.name] = std::move(rows);
    }
    return nlohmann::json{{"config", cfg}, {"tensors", tensors}, {"storage", "row-major"}};
}

inline NetworkConfig network_config_from_json(const nlohmann::json& cfg) {
    NetworkConfig c;
    c.input_dim = cfg.at("input_dim").get<int>();
    c.hidden_width = cfg.at("hidden_width").get<int>();
    c.hidden_layers = cfg.at("hidden_layers").get<int>();
    c.x_embed_dim = cfg.at("x_embed_dim").get<int>();
    c.t_embed_dim = cfg.at("t_embed_dim").get<int>();
    c.y_embed_dim = cfg.at("y_embed_dim").get<int>();
    c.n_conditions = cfg.at("n_conditions").get<int>();
    c.x_sin_dim = cfg.at("x_sin_dim").get<int>();
    c.y_sin_dim = cfg.at("y_sin_dim").get<int>();
    c.t_sin_dim = cfg.at("t_sin_dim").get<int>();
    c.output_dim = cfg.at("output_dim").get<int>();
    return c;
}

inline Network network_from_json(const nlohmann::json& j) {
    Network net(network_config_from_json(j.at("config")));
    const auto& tensors = j.at("tensors");
    for (std::size_t i = 0; i < net.layout().size(); ++i) {
        const TensorSpec& spec = net.layout()[i];
        const auto& rows = tensors.at(spec.name);
        if (static_cast<Eigen::Index>(rows.size()) != spec.rows)
            throw std::runtime_error("network checkpoint: tensor " + spec.name + " row mismatch");
        auto view = net.tensor(i);
        for (Eigen::Index r = 0; r < spec.rows; ++r) {
            const auto& row = rows[static_cast<std::size_t>(r)];
            if (static_cast<Eigen::Index>(row.size()) != spec.cols)
                throw std::runtime_error("network checkpoint: tensor " + spec.name +
                                         " column mismatch");
            for (Eigen::Index c = 0; c < spec.cols; ++c)
                view(r, c) = row[static_cast<std::size_t>(c)].get<double>();
        }
    }
    return net;
}

inline nlohmann::json adam_to_json(const AdamState& s) {
    return nlohmann::json{{"m", std::vector<double>(s.m.begin(), s.m.end())},
                          {"v", std::vector<double>(s.v.begin(), s.v.end())},
                          {"step", s.step},
                          {"lr", s.lr},
                          {"beta1", s.beta1},
                          {"beta2", s.beta2},
                          {"eps", s.eps}};
}

inline AdamState adam_from_json(const nlohmann::json& j) {
    AdamState s;
    auto m = j.at("m").get<std::vector<double>>();
    auto v = j.at("v").get<std::vector<double>>();
    s.m = Eigen::Map<Eigen::VectorXd>(m.data(), static_cast<Eigen::Index>(m.size()));
    s.v = Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    s.step = j.at("step").get<long>();
    s.lr = j.at("lr").get<double>();
    s.beta1 = j.at("beta1").get<double>();
    s.beta2 = j.at("beta2").get<double>();
    s.eps = j.at("eps").get<double>();
    return s;
}

}  // namespace stellagen
