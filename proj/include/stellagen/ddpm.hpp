#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stellagen/dataset.hpp"
#include "stellagen/mlp.hpp"
#include "stellagen/pca.hpp"
#include "stellagen/rng.hpp"
#include "stellagen/surface.hpp"

namespace stellagen {

enum class SigmaMode { Beta, BetaTilde };

// Vectors are indexed t = 1..T as [t-1].
struct NoiseSchedule {
    int T = 0;
    Eigen::VectorXd beta, alpha, alpha_bar, sigma;

    double beta_at(int t) const { return beta[check(t)]; }
    double alpha_at(int t) const { return alpha[check(t)]; }
    double alpha_bar_at(int t) const { return alpha_bar[check(t)]; }
    double sigma_at(int t) const { return sigma[check(t)]; }

  private:
    int check(int t) const {
        if (t < 1 || t > T)
            throw std::out_of_range("timestep " + std::to_string(t) + " outside [1, " +
                                    std::to_string(T) + "]");
        return t - 1;
    }
};

// Linearly spaced beta_t; sigma_t^2 = beta_t by default, or the posterior
// variance beta_tilde_t = (1 - abar_{t-1})/(1 - abar_t) * beta_t.
inline NoiseSchedule linear_schedule(int T, double beta_start = 1e-4, double beta_end = 0.02,
                                     SigmaMode mode = SigmaMode::Beta) {
    if (T < 1) throw std::invalid_argument("schedule: T must be >= 1");
    if (!(beta_start > 0.0) || !(beta_start < beta_end) || !(beta_end < 1.0))
        throw std::invalid_argument("schedule: need 0 < beta_start < beta_end < 1");
    NoiseSchedule s;
    s.T = T;
    s.beta.resize(T);
    s.alpha.resize(T);
    s.alpha_bar.resize(T);
    s.sigma.resize(T);
    double prod = 1.0;
    for (int t = 0; t < T; ++t) {
        s.beta[t] = T == 1 ? beta_start : beta_start + (beta_end - beta_start) * t / (T - 1);
        s.alpha[t] = 1.0 - s.beta[t];
        prod *= s.alpha[t];
        s.alpha_bar[t] = prod;
    }
    for (int t = 0; t < T; ++t) {
        if (mode == SigmaMode::Beta) {
            s.sigma[t] = std::sqrt(s.beta[t]);
        } else {
            const double abar_prev = t == 0 ? 1.0 : s.alpha_bar[t - 1];
            s.sigma[t] = std::sqrt((1.0 - abar_prev) / (1.0 - s.alpha_bar[t]) * s.beta[t]);
        }
    }
    return s;
}

// x_t = sqrt(abar_t) x0 + sqrt(1 - abar_t) z
inline Eigen::VectorXd q_sample(const NoiseSchedule& s, const Eigen::VectorXd& x0, int t,
                                const Eigen::VectorXd& z) {
    if (z.size() != x0.size()) throw std::invalid_argument("q_sample: shape mismatch");
    const double abar = s.alpha_bar_at(t);
    return std::sqrt(abar) * x0 + std::sqrt(1.0 - abar) * z;
}

// Bundle that makes sampling self-contained: schedule + network + the PCA basis
// and normalizer used to build the training codes, plus the surface mode orders
// needed to unpack decoded vectors.
struct Ddpm {
    NoiseSchedule schedule;
    Network network;
    PcaModel pca;
    Normalizer normalizer;
    int m_pol = 0;
    int n_tor = 0;

    void validate() const {
        if (network.config().input_dim != pca.n_r)
            throw std::invalid_argument("Ddpm: network input_dim must equal PCA n_r");
        if (normalizer.feature_mean.size() != pca.n_r)
            throw std::invalid_argument("Ddpm: normalizer dimension must equal PCA n_r");
    }
};

struct TrainConfig {
    int epochs = 250;
    int batch_size = 4096;
    double lr = 5e-4;
    std::uint64_t seed = 0;
};

struct TrainResult {
    std::vector<double> epoch_loss;
    long steps = 0;
    bool diverged = false;
    std::string divergence_note;
    std::string rng_state;  // noise-stream state at exit, for checkpointing
};

// Algorithm: per step draw a record batch, t ~ U{1..T}, z ~ N(0, I), take one
// Adam step on grad ||z - f(q_sample(x0, t, z), t, y)||^2. The input dataset must
// already hold normalized PCA codes as features and normalized conditions.
// Deterministic for a fixed seed. A non-finite loss stops training and flags the
// result as diverged; the caller decides what to do with the checkpoint.
inline TrainResult train(Ddpm& model, const Dataset& data, const TrainConfig& cfg,
                         AdamState* resume_state = nullptr) {
    if (data.empty()) throw std::invalid_argument("train: empty dataset");
    if (data.n_x != model.network.config().input_dim)
        throw std::invalid_argument("train: dataset n_x must equal network input_dim");
    model.validate();

    AdamState local = AdamState::init(model.network.n_params(), cfg.lr);
    AdamState& adam = resume_state ? *resume_state : local;
    adam.lr = cfg.lr;
    Rng noise_rng(derive_seed(cfg.seed, 0xd1f5ULL));

    const int n_r = model.pca.n_r;
    TrainResult result;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        double epoch_loss = 0.0;
        long epoch_batches = 0;
        for (const auto& batch : batch_indices(data.size(), static_cast<std::size_t>(cfg.batch_size),
                                               cfg.seed, static_cast<std::uint64_t>(epoch))) {
            const Eigen::Index B = static_cast<Eigen::Index>(batch.size());
            Eigen::MatrixXd xt(B, n_r), target(B, n_r), y(B, 4);
            Eigen::VectorXd tvals(B);
            for (Eigen::Index i = 0; i < B; ++i) {
                const Record& rec = data.records[batch[static_cast<std::size_t>(i)]];
                const int t = 1 + static_cast<int>(noise_rng.below(
                                  static_cast<std::uint64_t>(model.schedule.T)));
                Eigen::VectorXd z(n_r);
                for (int k = 0; k < n_r; ++k) z[k] = noise_rng.normal();
                xt.row(i) = q_sample(model.schedule, rec.features, t, z).transpose();
                target.row(i) = z.transpose();
                y.row(i) = rec.conditions.transpose();
                tvals[i] = static_cast<double>(t);
            }
            BackwardResult back;
            try {
                back = backward(model.network, xt, tvals, y, target);
            } catch (const std::runtime_error& e) {
                result.diverged = true;
                result.divergence_note = e.what();
                result.rng_state = noise_rng.serialize();
                return result;
            }
            adam_step(adam, model.network, back.grad);
            epoch_loss += back.loss;
            ++epoch_batches;
            ++result.steps;
        }
        result.epoch_loss.push_back(epoch_loss / static_cast<double>(epoch_batches));
    }
    result.rng_state = noise_rng.serialize();
    return result;
}

// Ancestral sampling (z = 0 at t = 1), one independent RNG stream per draw so
// draws can be generated in any grouping without changing results. Conditions
// are raw physical values; returns normalized codes (rows).
inline Eigen::MatrixXd sample(const Ddpm& model, const Condition& y_raw, int count,
                              std::uint64_t seed) {
    if (count < 0) throw std::invalid_argument("sample: count must be >= 0");
    if (!y_raw.allFinite()) throw std::invalid_argument("sample: non-finite condition");
    model.validate();
    const int n_r = model.pca.n_r;
    const NoiseSchedule& s = model.schedule;
    Eigen::MatrixXd codes(count, n_r);

    for (int d = 0; d < count; ++d) {
        Rng rng(derive_seed(seed, 0x5a3bULL, static_cast<std::uint64_t>(d)));
        Eigen::VectorXd x(n_r);
        for (int k = 0; k < n_r; ++k) x[k] = rng.normal();
        Eigen::MatrixXd xrow(1, n_r), yrow(1, 4);
        yrow.row(0) = normalize_condition(y_raw, model.normalizer).transpose();
        Eigen::VectorXd tval(1);
        for (int t = s.T; t >= 1; --t) {
            xrow.row(0) = x.transpose();
            tval[0] = static_cast<double>(t);
            Eigen::VectorXd eps = model.network.forward(xrow, tval, yrow).row(0).transpose();
            const double a = s.alpha_at(t);
            const double abar = s.alpha_bar_at(t);
            x = (x - (1.0 - a) / std::sqrt(1.0 - abar) * eps) / std::sqrt(a);
            if (t > 1) {
                const double sig = s.sigma_at(t);
                for (int k = 0; k < n_r; ++k) x[k] += sig * rng.normal();
            }
            if (!x.allFinite())
                throw std::runtime_error("sample: non-finite state at timestep " +
                                         std::to_string(t));
        }
        codes.row(d) = x.transpose();
    }
    return codes;
}

// Normalized code -> raw coefficient vector.
inline Eigen::VectorXd decode_code(const Ddpm& model, const Eigen::VectorXd& code) {
    return pca_decode(model.pca, denormalize_features(code, model.normalizer));
}

struct GeneratedSurface {
    std::string id;
    ConditionRow target;
    int draw = 0;
    Eigen::VectorXd coeffs;

    FourierSurface surface(int m_pol, int n_tor) const {
        return unpack(coeffs, target.nfp, m_pol, n_tor);
    }
};

// Sample n_per_condition codes at each condition row, decode through the
// normalizer and PCA, and tag each coefficient vector with its target row.
inline std::vector<GeneratedSurface> generate_surfaces(const Ddpm& model,
                                                       const std::vector<ConditionRow>& rows,
                                                       int n_per_condition, std::uint64_t seed) {
    if (n_per_condition < 0) throw std::invalid_argument("generate_surfaces: negative count");
    std::vector<GeneratedSurface> out;
    out.reserve(rows.size() * static_cast<std::size_t>(n_per_condition));
    for (std::size_t c = 0; c < rows.size(); ++c) {
        Eigen::MatrixXd codes = sample(model, rows[c].as_condition(), n_per_condition,
                                       derive_seed(seed, 0xc0deULL, c));
        for (int d = 0; d < n_per_condition; ++d) {
            GeneratedSurface g;
            g.id = "gen-c" + std::to_string(c) + "-d" + std::to_string(d);
            g.target = rows[c];
            g.draw = d;
            g.coeffs = decode_code(model, codes.row(d).transpose());
            out.push_back(std::move(g));
        }
    }
    return out;
}

inline nlohmann::json schedule_to_json(const NoiseSchedule& s) {
    return nlohmann::json{{"T", s.T},
                          {"beta", std::vector<double>(s.beta.begin(), s.beta.end())},
                          {"sigma", std::vector<double>(s.sigma.begin(), s.sigma.end())}};
}

inline NoiseSchedule schedule_from_json(const nlohmann::json& j) {
    NoiseSchedule s;
    s.T = j.at("T").get<int>();
    auto beta = j.at("beta").get<std::vector<double>>();
    auto sigma = j.at("sigma").get<std::vector<double>>();
    if (static_cast<int>(beta.size()) != s.T || static_cast<int>(sigma.size()) != s.T)
        throw std::runtime_error("schedule checkpoint: length mismatch");
    s.beta = Eigen::Map<Eigen::VectorXd>(beta.data(), s.T);
    s.sigma = Eigen::Map<Eigen::VectorXd>(sigma.data(), s.T);
    s.alpha = 1.0 - s.beta.array();
    s.alpha_bar.resize(s.T);
    double prod = 1.0;
    for (int t = 0; t < s.T; ++t) {
        prod *= s.alpha[t];
        s.alpha_bar[t] = prod;
    }
    return s;
}

inline nlohmann::json normalizer_to_json(const Normalizer& n) {
    return nlohmann::json{
        {"feature_mean", std::vector<double>(n.feature_mean.begin(), n.feature_mean.end())},
        {"feature_scale", std::vector<double>(n.feature_scale.begin(), n.feature_scale.end())},
        {"condition_mean", std::vector<double>(n.condition_mean.begin(), n.condition_mean.end())},
        {"condition_scale",
         std::vector<double>(n.condition_scale.begin(), n.condition_scale.end())}};
}

inline Normalizer normalizer_from_json(const nlohmann::json& j) {
    Normalizer n;
    auto fm = j.at("feature_mean").get<std::vector<double>>();
    auto fs = j.at("feature_scale").get<std::vector<double>>();
    n.feature_mean = Eigen::Map<Eigen::VectorXd>(fm.data(), static_cast<Eigen::Index>(fm.size()));
    n.feature_scale = Eigen::Map<Eigen::VectorXd>(fs.data(), static_cast<Eigen::Index>(fs.size()));
    auto cm = j.at("condition_mean").get<std::vector<double>>();
    auto cs = j.at("condition_scale").get<std::vector<double>>();
    if (cm.size() != 4 || cs.size() != 4)
        throw std::runtime_error("normalizer checkpoint: condition vectors must have length 4");
    for (int i = 0; i < 4; ++i) {
        n.condition_mean[i] = cm[static_cast<std::size_t>(i)];
        n.condition_scale[i] = cs[static_cast<std::size_t>(i)];
    }
    return n;
}

inline nlohmann::json checkpoint_to_json(const Ddpm& model, const AdamState* adam = nullptr,
                                         const std::string& rng_state = {}) {
    nlohmann::json j{{"format", "stellagen-ddpm-v1"},
                     {"schedule", schedule_to_json(model.schedule)},
                     {"network", network_to_json(model.network)},
                     {"pca", pca_to_json(model.pca)},
                     {"normalizer", normalizer_to_json(model.normalizer)},
                     {"m_pol", model.m_pol},
                     {"n_tor", model.n_tor}};
    if (adam) j["adam"] = adam_to_json(*adam);
    if (!rng_state.empty()) j["rng"] = rng_state;
    return j;
}

inline Ddpm checkpoint_from_json(const nlohmann::json& j, AdamState* adam_out = nullptr) {
    if (j.at("format").get<std::string>() != "stellagen-ddpm-v1")
        throw std::runtime_error("unknown checkpoint format");
    Ddpm model;
    model.schedule = schedule_from_json(j.at("schedule"));
    model.network = network_from_json(j.at("network"));
    model.pca = pca_from_json(j.at("pca"));
    model.normalizer = normalizer_from_json(j.at("normalizer"));
    model.m_pol = j.at("m_pol").get<int>();
    model.n_tor = j.at("n_tor").get<int>();
    if (adam_out && j.contains("adam")) *adam_out = adam_from_json(j.at("adam"));
    model.validate();
    return model;
}

inline void save_checkpoint(const Ddpm& model, const std::string& path,
                            const AdamState* adam = nullptr, const std::string& rng_state = {}) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << checkpoint_to_json(model, adam, rng_state).dump() << '\n';
}

inline Ddpm load_checkpoint(const std::string& path, AdamState* adam_out = nullptr) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint " + path);
    nlohmann::json j;
    in >> j;
    return checkpoint_from_json(j, adam_out);
}

}  // namespace stellagen
