// Command-line front end: synthesize data, fit PCA, train the conditional
// diffusion model, sample boundaries at condition tables, and evaluate them.

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "stellagen/dataset.hpp"
#include "stellagen/ddpm.hpp"
#include "stellagen/pca.hpp"
#include "stellagen/pipeline.hpp"
#include "stellagen/surface.hpp"

namespace sg = stellagen;

namespace {

struct GlobalOpts {
    std::string config_path;
    bool has_seed = false;
    std::uint64_t seed = 0;
    std::string out;
};

sg::RunConfig load_config(const GlobalOpts& g) {
    sg::RunConfig cfg = g.config_path.empty() ? sg::RunConfig{} : sg::load_run_config(g.config_path);
    if (g.has_seed) cfg.seed = g.seed;
    return cfg;
}

std::vector<sg::ConditionRow> resolve_conditions(const std::string& spec) {
    if (spec == "table1-in") {
        const auto& t = sg::table1_in_sample();
        return {t.begin(), t.end()};
    }
    if (spec == "table1-out") {
        const auto& t = sg::table1_out_of_sample();
        return {t.begin(), t.end()};
    }
    return sg::load_condition_table(spec);
}

int cmd_synth_data(const GlobalOpts& g) {
    sg::RunConfig cfg = load_config(g);
    const std::string out = g.out.empty() ? cfg.dataset_path : g.out;
    sg::Dataset ds = sg::synth_dataset(cfg.synth, cfg.seed);
    sg::save_dataset(ds, out);
    std::cout << "wrote " << ds.size() << " records (n_x=" << ds.n_x << ") to " << out << "\n";
    return 0;
}

int cmd_ingest(const GlobalOpts& g, const std::string& in_path) {
    sg::RunConfig cfg = load_config(g);
    const Eigen::Index nx = sg::feature_length(cfg.m_pol, cfg.n_tor);
    sg::Dataset ds = sg::load_dataset(in_path, nx);
    std::cout << "ingested " << ds.size() << " records, n_x=" << ds.n_x << "\n";
    if (!g.out.empty()) {
        sg::save_dataset(ds, g.out);
        std::cout << "rewrote validated dataset to " << g.out << "\n";
    }
    return 0;
}

int cmd_pca_fit(const GlobalOpts& g) {
    sg::RunConfig cfg = load_config(g);
    sg::Dataset ds = sg::load_dataset(cfg.dataset_path, sg::feature_length(cfg.m_pol, cfg.n_tor));
    sg::PcaModel model = sg::pca_fit(sg::features_matrix(ds), cfg.n_r);
    const std::string out = g.out.empty() ? (cfg.pca_path.empty() ? "pca.json" : cfg.pca_path) : g.out;
    sg::save_pca(model, out);
    double captured = model.variance_spectrum.sum();
    Eigen::MatrixXd feats = sg::features_matrix(ds);
    Eigen::MatrixXd centered = feats.rowwise() - model.mean.transpose();
    const double total = centered.squaredNorm() / static_cast<double>(feats.rows());
    std::cout << "pca: n_r=" << model.n_r << " explains "
              << (total > 0 ? captured / total : 1.0) * 100.0 << "% of variance; wrote " << out
              << "\n";
    return 0;
}

int cmd_train(const GlobalOpts& g) {
    sg::RunConfig cfg = load_config(g);
    sg::Dataset ds = sg::load_dataset(cfg.dataset_path, sg::feature_length(cfg.m_pol, cfg.n_tor));
    sg::TrainOutput out = sg::train_pipeline(ds, cfg);
    const std::string path = g.out.empty() ? cfg.checkpoint_path : g.out;
    if (out.result.diverged) {
        sg::save_checkpoint(out.model, path + ".diverged.json", &out.adam, out.result.rng_state);
        std::cerr << "training diverged: " << out.result.divergence_note
                  << " (checkpoint saved to " << path << ".diverged.json)\n";
        return 1;
    }
    sg::save_checkpoint(out.model, path, &out.adam, out.result.rng_state);
    std::cout << "trained on " << out.n_train << " records (" << out.n_val << " held out), "
              << out.result.steps << " steps; final epoch loss "
              << (out.result.epoch_loss.empty() ? 0.0 : out.result.epoch_loss.back())
              << "; wrote " << path << "\n";
    return 0;
}

int cmd_sample(const GlobalOpts& g, const std::string& conditions, int n_per_condition,
               const std::string& checkpoint_override) {
    sg::RunConfig cfg = load_config(g);
    const std::string ckpt = checkpoint_override.empty() ? cfg.checkpoint_path : checkpoint_override;
    sg::Ddpm model = sg::load_checkpoint(ckpt);
    std::vector<sg::ConditionRow> rows = resolve_conditions(conditions);
    auto generated = sg::generate_surfaces(model, rows, n_per_condition, cfg.seed);
    sg::Dataset ds = sg::generated_to_dataset(
        generated, sg::feature_length(model.m_pol, model.n_tor));
    const std::string out = g.out.empty() ? "samples.jsonl" : g.out;
    sg::save_dataset(ds, out);
    std::cout << "sampled " << generated.size() << " surfaces (" << rows.size() << " conditions x "
              << n_per_condition << ") to " << out << "\n";
    return 0;
}

int cmd_evaluate(const GlobalOpts& g, const std::string& in_path) {
    sg::RunConfig cfg = load_config(g);
    sg::Dataset samples = sg::load_dataset(in_path, sg::feature_length(cfg.m_pol, cfg.n_tor));
    auto rows = sg::evaluate_samples(samples, cfg.m_pol, cfg.n_tor, cfg.eval);
    const std::string out = g.out.empty() ? "evaluation.csv" : g.out;
    sg::write_evaluation_csv(rows, out);
    int valid = 0;
    for (const auto& r : rows) valid += r.valid ? 1 : 0;
    std::cout << "evaluated " << rows.size() << " samples (" << rows.size() - valid
              << " invalid) to " << out << "\n";
    return 0;
}

int cmd_report(const GlobalOpts& g, const std::string& in_path) {
    sg::RunConfig cfg = load_config(g);
    auto rows = sg::read_evaluation_csv(in_path);
    auto groups = sg::summarize(rows, cfg.eval.c_threshold, cfg.eval.jqs_threshold);
    const std::string out = g.out.empty() ? "summary.csv" : g.out;
    sg::write_summary_csv(groups, out);
    for (const auto& grp : groups) {
        std::cout << "nfp=" << grp.condition.nfp << " N=" << grp.condition.helicity
                  << " A*=" << grp.condition.aspect_ratio << " iota*=" << grp.condition.mean_iota
                  << ": n=" << grp.n_samples << " invalid=" << grp.invalid_fraction;
        if (grp.abs_c_aspect)
            std::cout << " |c_A| median=" << grp.abs_c_aspect->q50
                      << " ok=" << grp.abs_c_aspect->ok_fraction;
        if (grp.j_qs_value)
            std::cout << " J_QS median=" << grp.j_qs_value->q50
                      << " ok=" << grp.j_qs_value->ok_fraction;
        std::cout << "\n";
    }
    std::cout << "wrote " << out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stellagen: conditional diffusion for stellarator boundary design"};
    app.require_subcommand(1);
    app.fallthrough();  // accept the global flags after a subcommand name

    GlobalOpts g;
    app.add_option("--config", g.config_path, "JSON run configuration");
    app.add_option("--seed", g.seed, "override the config seed")->each([&](const std::string&) {
        g.has_seed = true;
    });
    app.add_option("--out", g.out, "output path override");

    auto* synth = app.add_subcommand("synth-data", "generate a synthetic torus-family dataset");
    auto* ingest = app.add_subcommand("ingest", "validate a JSON-Lines dataset");
    std::string ingest_in;
    ingest->add_option("--in", ingest_in, "dataset path")->required();
    auto* pca = app.add_subcommand("pca-fit", "fit the PCA reduction on a dataset");
    auto* train = app.add_subcommand("train", "train the conditional diffusion model");
    auto* sample = app.add_subcommand("sample", "sample boundaries at given conditions");
    std::string conditions = "table1-out";
    int n_per_condition = 16;
    std::string checkpoint_override;
    sample->add_option("--conditions", conditions,
                       "table1-in, table1-out, or a JSON file with {\"rows\": [...]}");
    sample->add_option("--n", n_per_condition, "samples per condition");
    sample->add_option("--checkpoint", checkpoint_override, "checkpoint path override");
    auto* evaluate = app.add_subcommand("evaluate", "compute metrics for sampled surfaces");
    std::string eval_in;
    evaluate->add_option("--in", eval_in, "samples JSONL path")->required();
    auto* report = app.add_subcommand("report", "summarize an evaluation CSV into quantiles");
    std::string report_in;
    report->add_option("--in", report_in, "evaluation CSV path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return cmd_synth_data(g);
        if (ingest->parsed()) return cmd_ingest(g, ingest_in);
        if (pca->parsed()) return cmd_pca_fit(g);
        if (train->parsed()) return cmd_train(g);
        if (sample->parsed()) return cmd_sample(g, conditions, n_per_condition, checkpoint_override);
        if (evaluate->parsed()) return cmd_evaluate(g, eval_in);
        if (report->parsed()) return cmd_report(g, report_in);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
