#pragma once

// Shared helpers for the ddpm and acceptance suites: a 1-D two-cluster toy task
// run through the full pipeline (PCA -> normalizer -> conditional DDPM).

#include <Eigen/Dense>
#include <cstdint>

#include "stellagen/dataset.hpp"
#include "stellagen/ddpm.hpp"
#include "stellagen/mlp.hpp"
#include "stellagen/pca.hpp"
#include "stellagen/pipeline.hpp"
#include "stellagen/rng.hpp"

namespace stellagen::testsupport {

// x0 = y with y in {-1, +1}; conditions carry y in the iota slot.
inline Dataset toy_dataset(int n, double noise = 0.0, std::uint64_t seed = 17) {
    Dataset ds;
    ds.n_x = 1;
    Rng rng(seed);
    for (int i = 0; i < n; ++i) {
        const double y = i % 2 == 0 ? 1.0 : -1.0;
        Record r;
        r.id = "toy-" + std::to_string(i);
        r.features = Eigen::VectorXd::Constant(1, y + noise * rng.normal());
        r.conditions << y, 1.0, 1.0, 0.0;
        ds.records.push_back(std::move(r));
    }
    return ds;
}

inline NetworkConfig toy_network_config(int input_dim, int width = 64, int layers = 2) {
    NetworkConfig cfg;
    cfg.input_dim = input_dim;
    cfg.output_dim = input_dim;
    cfg.hidden_width = width;
    cfg.hidden_layers = layers;
    cfg.x_embed_dim = 16;
    cfg.t_embed_dim = 32;
    cfg.y_embed_dim = 32;
    cfg.x_sin_dim = 8;
    cfg.y_sin_dim = 8;
    cfg.t_sin_dim = 32;
    return cfg;
}

struct ToyRun {
    Ddpm model;
    TrainResult result;
};

inline ToyRun train_toy(const Dataset& raw, int T, int width, int layers, int epochs,
                        int batch_size, std::uint64_t seed, double lr = 1e-3) {
    ToyRun run;
    run.model.pca = pca_fit(features_matrix(raw), static_cast<int>(raw.n_x));
    Dataset encoded = encode_dataset(raw, run.model.pca);
    run.model.normalizer = fit_normalizer(encoded);
    Dataset normalized = normalize_dataset(encoded, run.model.normalizer);
    run.model.network =
        Network::he_init(toy_network_config(static_cast<int>(raw.n_x), width, layers), seed);
    run.model.schedule = linear_schedule(T, 1e-4, 0.02);
    run.model.m_pol = 0;
    run.model.n_tor = 0;
    TrainConfig tc;
    tc.epochs = epochs;
    tc.batch_size = batch_size;
    tc.lr = lr;
    tc.seed = seed;
    run.result = train(run.model, normalized, tc);
    return run;
}

// Mean of decoded samples at condition y (toy condition layout).
inline double sampled_mean(const Ddpm& model, double y, int n_draws, std::uint64_t seed) {
    Condition cond(y, 1.0, 1.0, 0.0);
    Eigen::MatrixXd codes = sample(model, cond, n_draws, seed);
    double acc = 0.0;
    for (int d = 0; d < n_draws; ++d)
        acc += decode_code(model, codes.row(d).transpose())[0];
    return acc / static_cast<double>(n_draws);
}

}  // namespace stellagen::testsupport
