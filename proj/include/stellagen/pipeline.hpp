#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stellagen/common.hpp"
#include "stellagen/dataset.hpp"
#include "stellagen/ddpm.hpp"
#include "stellagen/pca.hpp"
#include "stellagen/qsmetrics.hpp"
#include "stellagen/rng.hpp"
#include "stellagen/surface.hpp"

namespace stellagen {

// ---------------------------------------------------------------------------
// Run configuration (JSON file behind --config)
// ---------------------------------------------------------------------------

struct SynthConfig {
    int count = 1000;
    int nfp = 2;
    int helicity = 0;
    int m_pol = 10;
    int n_tor = 10;
    double aspect_min = 3.0;
    double aspect_max = 10.0;
    double iota_placeholder = 0.5;
    double shaping = 0.05;  // relative magnitude of the nuisance shaping coefficients
};

struct ScheduleConfig {
    int T = 200;
    double beta_start = 1e-4;
    double beta_end = 0.02;
    std::string sigma_mode = "beta";  // "beta" or "beta-tilde"

    NoiseSchedule build() const {
        return linear_schedule(T, beta_start, beta_end,
                               sigma_mode == "beta-tilde" ? SigmaMode::BetaTilde : SigmaMode::Beta);
    }
};

struct FieldSourceConfig {
    std::string kind = "none";  // none | synthetic | command
    // synthetic analytic field
    double b0 = 1.0;
    double qs_amp = 0.1;
    double ripple = 0.0;
    double iota_value = 0.5;
    // external-evaluator adapter: command template with {surface} and {out}
    std::string command;
    std::string workdir = ".";
};

struct EvalConfig {
    int n_phi = 0;    // 0 -> resolution rule default
    int n_theta = 0;
    int field_grid = 0;  // square QS grid; 0 -> max(defaults)
    double c_threshold = 0.05;
    double jqs_threshold = 0.01;
    FieldSourceConfig field;
};

struct RunConfig {
    std::string dataset_path = "dataset.jsonl";
    std::string checkpoint_path = "checkpoint.json";
    std::string pca_path;  // optional standalone PCA model
    int m_pol = 10;
    int n_tor = 10;
    int n_r = 50;
    double val_fraction = 0.1;
    std::uint64_t seed = 0;
    NetworkConfig network;  // input/output dims filled from n_r at build time
    ScheduleConfig schedule;
    TrainConfig train;
    SynthConfig synth;
    EvalConfig eval;
};

inline RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig c;
    c.dataset_path = j.value("dataset", c.dataset_path);
    c.checkpoint_path = j.value("checkpoint", c.checkpoint_path);
    c.pca_path = j.value("pca_model", c.pca_path);
    c.m_pol = j.value("m_pol", c.m_pol);
    c.n_tor = j.value("n_tor", c.n_tor);
    c.n_r = j.value("n_r", c.n_r);
    c.val_fraction = j.value("val_fraction", c.val_fraction);
    c.seed = j.value("seed", c.seed);
    if (j.contains("network")) {
        const auto& n = j.at("network");
        c.network.hidden_width = n.value("hidden_width", c.network.hidden_width);
        c.network.hidden_layers = n.value("hidden_layers", c.network.hidden_layers);
        c.network.x_embed_dim = n.value("x_embed_dim", c.network.x_embed_dim);
        c.network.t_embed_dim = n.value("t_embed_dim", c.network.t_embed_dim);
        c.network.y_embed_dim = n.value("y_embed_dim", c.network.y_embed_dim);
        c.network.x_sin_dim = n.value("x_sin_dim", c.network.x_sin_dim);
        c.network.y_sin_dim = n.value("y_sin_dim", c.network.y_sin_dim);
        c.network.t_sin_dim = n.value("t_sin_dim", c.network.t_sin_dim);
    }
    if (j.contains("schedule")) {
        const auto& s = j.at("schedule");
        c.schedule.T = s.value("T", c.schedule.T);
        c.schedule.beta_start = s.value("beta_start", c.schedule.beta_start);
        c.schedule.beta_end = s.value("beta_end", c.schedule.beta_end);
        c.schedule.sigma_mode = s.value("sigma_mode", c.schedule.sigma_mode);
    }
    if (j.contains("train")) {
        const auto& t = j.at("train");
        c.train.epochs = t.value("epochs", c.train.epochs);
        c.train.batch_size = t.value("batch_size", c.train.batch_size);
        c.train.lr = t.value("lr", c.train.lr);
    }
    if (j.contains("synth")) {
        const auto& s = j.at("synth");
        c.synth.count = s.value("count", c.synth.count);
        c.synth.nfp = s.value("nfp", c.synth.nfp);
        c.synth.helicity = s.value("helicity", c.synth.helicity);
        c.synth.m_pol = s.value("m_pol", c.synth.m_pol);
        c.synth.n_tor = s.value("n_tor", c.synth.n_tor);
        c.synth.aspect_min = s.value("aspect_min", c.synth.aspect_min);
        c.synth.aspect_max = s.value("aspect_max", c.synth.aspect_max);
        c.synth.iota_placeholder = s.value("iota_placeholder", c.synth.iota_placeholder);
        c.synth.shaping = s.value("shaping", c.synth.shaping);
    }
    if (j.contains("eval")) {
        const auto& e = j.at("eval");
        c.eval.n_phi = e.value("n_phi", c.eval.n_phi);
        c.eval.n_theta = e.value("n_theta", c.eval.n_theta);
        c.eval.field_grid = e.value("field_grid", c.eval.field_grid);
        c.eval.c_threshold = e.value("c_threshold", c.eval.c_threshold);
        c.eval.jqs_threshold = e.value("jqs_threshold", c.eval.jqs_threshold);
        if (e.contains("field")) {
            const auto& f = e.at("field");
            c.eval.field.kind = f.value("kind", c.eval.field.kind);
            c.eval.field.b0 = f.value("b0", c.eval.field.b0);
            c.eval.field.qs_amp = f.value("qs_amp", c.eval.field.qs_amp);
            c.eval.field.ripple = f.value("ripple", c.eval.field.ripple);
            c.eval.field.iota_value = f.value("iota_value", c.eval.field.iota_value);
            c.eval.field.command = f.value("command", c.eval.field.command);
            c.eval.field.workdir = f.value("workdir", c.eval.field.workdir);
        }
    }
    return c;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    nlohmann::json j;
    in >> j;
    return run_config_from_json(j);
}

// ---------------------------------------------------------------------------
// Synthetic torus-family data (desk-scale stand-in for a device database)
// ---------------------------------------------------------------------------

namespace detail {

// Base torus R=1, r = 1/aspect, plus r-proportional low-order shaping. The
// minor radius is re-fit so the measured aspect ratio lands on the target.
inline FourierSurface synth_surface(const SynthConfig& cfg, double aspect_target,
                                    const std::vector<double>& shape) {
    const int m = cfg.m_pol, n = cfg.n_tor;
    double r = 1.0 / aspect_target;
    FourierSurface s(cfg.nfp, m, n);
    for (int pass = 0; pass < 3; ++pass) {
        s = FourierSurface(cfg.nfp, m, n);
        s.x(0, 0) = 1.0;
        s.x(1, 0) = r * (1.0 + shape[0]);        // elongation (cos theta)
        s.z(m + 1, 0) = r * (1.0 - shape[0]);    // elongation (sin theta)
        s.x(2, 0) = r * shape[1];                // cos(2 theta) shaping
        s.z(m + 2, 0) = r * shape[2];            // sin(2 theta) shaping
        s.x(0, 1) = r * shape[3];                // cos(nfp phi) ripple
        s.z(0, n + 1) = r * shape[4];            // sin(nfp phi) axis wobble
        s.x(m + 1, n + 1) = r * shape[5];        // sin(theta) sin(nfp phi) coupling
        s.y(m + 1, 0) = r * shape[6];            // sin(theta) cross-section tilt
        const double measured = geometry(s).aspect_ratio;
        if (std::abs(measured - aspect_target) < 1e-10 * aspect_target) break;
        r *= measured / aspect_target;  // A ~ const/r, so this converges fast
    }
    return s;
}

}  // namespace detail

// Deterministic synthetic dataset; stored aspect ratios are the measured values,
// so records are self-consistent with `geometry` by construction.
inline Dataset synth_dataset(const SynthConfig& cfg, std::uint64_t seed) {
    if (cfg.count < 0) throw std::invalid_argument("synth: count must be >= 0");
    if (!(cfg.aspect_min > 1.0) || !(cfg.aspect_max > cfg.aspect_min))
        throw std::invalid_argument("synth: need 1 < aspect_min < aspect_max");
    Dataset ds;
    ds.n_x = feature_length(cfg.m_pol, cfg.n_tor);
    ds.records.reserve(static_cast<std::size_t>(cfg.count));
    for (int i = 0; i < cfg.count; ++i) {
        Rng rng(derive_seed(seed, 0x5f0aULL, static_cast<std::uint64_t>(i)));
        // keep targets off the exact interval ends so the re-fit cannot escape it
        const double span = cfg.aspect_max - cfg.aspect_min;
        const double target = cfg.aspect_min + span * (0.005 + 0.99 * rng.uniform());
        std::vector<double> shape(7);
        for (double& v : shape) v = cfg.shaping * (2.0 * rng.uniform() - 1.0);
        shape[0] *= 2.0;  // elongation gets a wider range than the rest
        FourierSurface s = detail::synth_surface(cfg, target, shape);
        Record rec;
        rec.id = "synth-" + std::to_string(i);
        rec.features = pack(s);
        rec.conditions << cfg.iota_placeholder, geometry(s).aspect_ratio,
            static_cast<double>(cfg.nfp), static_cast<double>(cfg.helicity);
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

// ---------------------------------------------------------------------------
// Training pipeline: PCA on raw coefficients, z-scored codes into the DDPM
// ---------------------------------------------------------------------------

inline Eigen::MatrixXd features_matrix(const Dataset& ds) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(ds.size()), ds.n_x);
    for (Eigen::Index i = 0; i < out.rows(); ++i)
        out.row(i) = ds.records[static_cast<std::size_t>(i)].features.transpose();
    return out;
}

inline Dataset encode_dataset(const Dataset& ds, const PcaModel& pca) {
    Dataset out;
    out.n_x = pca.n_r;
    out.records.reserve(ds.size());
    for (const Record& r : ds.records) {
        Record e = r;
        e.features = pca_encode(pca, r.features);
        out.records.push_back(std::move(e));
    }
    return out;
}

inline Dataset normalize_dataset(const Dataset& ds, const Normalizer& nm) {
    Dataset out;
    out.n_x = ds.n_x;
    out.records.reserve(ds.size());
    for (const Record& r : ds.records) out.records.push_back(normalize(r, nm));
    return out;
}

struct TrainOutput {
    Ddpm model;
    TrainResult result;
    AdamState adam;
    std::size_t n_train = 0;
    std::size_t n_val = 0;
};

inline TrainOutput train_pipeline(const Dataset& raw, const RunConfig& cfg) {
    if (raw.n_x != feature_length(cfg.m_pol, cfg.n_tor))
        throw std::invalid_argument("train: dataset n_x does not match (m_pol, n_tor)");
    auto [train_set, val_set] = split(raw, 1.0 - cfg.val_fraction, cfg.val_fraction, cfg.seed);

    TrainOutput out;
    out.n_train = train_set.size();
    out.n_val = val_set.size();
    out.model.pca = pca_fit(features_matrix(train_set), cfg.n_r);
    Dataset encoded = encode_dataset(train_set, out.model.pca);
    out.model.normalizer = fit_normalizer(encoded);
    Dataset normalized = normalize_dataset(encoded, out.model.normalizer);

    NetworkConfig ncfg = cfg.network;
    ncfg.input_dim = cfg.n_r;
    ncfg.output_dim = cfg.n_r;
    out.model.network = Network::he_init(ncfg, cfg.seed);
    out.model.schedule = cfg.schedule.build();
    out.model.m_pol = cfg.m_pol;
    out.model.n_tor = cfg.n_tor;

    TrainConfig tc = cfg.train;
    tc.seed = cfg.seed;
    out.adam = AdamState::init(out.model.network.n_params(), tc.lr);
    out.result = train(out.model, normalized, tc, &out.adam);
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation and reporting
// ---------------------------------------------------------------------------

struct EvaluationRow {
    std::string id;
    ConditionRow target;
    bool valid = false;
    std::optional<double> aspect_measured;
    std::optional<double> c_aspect;
    std::optional<double> iota_measured;
    std::optional<double> c_iota;
    std::optional<double> j_qs_value;
    std::string error;

    bool operator==(const EvaluationRow&) const = default;
};

namespace detail {

inline std::string run_external_evaluator(const FieldSourceConfig& fs, const FourierSurface& s,
                                          const std::string& tag) {
    const std::string surface_path = fs.workdir + "/" + tag + ".surface.json";
    const std::string out_prefix = fs.workdir + "/" + tag;
    write_surface_json(s, surface_path);
    std::string cmd = fs.command;
    auto replace_all = [](std::string& str, const std::string& from, const std::string& to) {
        for (std::size_t pos = 0; (pos = str.find(from, pos)) != std::string::npos;
             pos += to.size())
            str.replace(pos, from.size(), to);
    };
    replace_all(cmd, "{surface}", surface_path);
    replace_all(cmd, "{out}", out_prefix);
    const int rc = std::system(cmd.c_str());
    if (rc != 0)
        throw std::runtime_error("external evaluator failed (exit " + std::to_string(rc) +
                                 "): " + cmd);
    return out_prefix;
}

}  // namespace detail

// Geometric A and c_A always; J_QS and c_iota only when a field source is
// configured. A sample that fails geometry (degenerate or inward-oriented
// surface) is flagged invalid and evaluation continues.
inline std::vector<EvaluationRow> evaluate_samples(const Dataset& samples, int m_pol, int n_tor,
                                                   const EvalConfig& cfg) {
    if (samples.n_x != feature_length(m_pol, n_tor))
        throw std::invalid_argument("evaluate: sample n_x does not match (m_pol, n_tor)");
    std::vector<EvaluationRow> rows(samples.size());
    const bool use_command = cfg.field.kind == "command";

    auto eval_one = [&](std::size_t i) {
        const Record& rec = samples.records[i];
        EvaluationRow& row = rows[i];
        row.id = rec.id;
        row.target = {rec.nfp(), rec.helicity(), rec.aspect_ratio(), rec.mean_iota()};
        try {
            FourierSurface s = unpack(rec.features, rec.nfp(), m_pol, n_tor);
            GeometrySummary geo = geometry(s, cfg.n_phi, cfg.n_theta);
            row.aspect_measured = geo.aspect_ratio;
            row.c_aspect = (geo.aspect_ratio - row.target.aspect_ratio) / row.target.aspect_ratio;

            if (cfg.field.kind == "synthetic") {
                int ng = cfg.field_grid;
                if (ng == 0) ng = std::max(default_n_phi(s), default_n_theta(s));
                SurfaceGrid grid = build_grid(s, ng, ng);
                FieldOnSurface f = synthetic_field(grid, rec.nfp(), rec.helicity(), cfg.field.b0,
                                                   cfg.field.qs_amp, cfg.field.ripple);
                row.j_qs_value = j_qs(f);
                row.iota_measured = cfg.field.iota_value;
                row.c_iota =
                    (cfg.field.iota_value - row.target.mean_iota) / row.target.mean_iota;
            } else if (use_command) {
                const std::string prefix =
                    detail::run_external_evaluator(cfg.field, s, rec.id);
                FieldOnSurface f = [&] {
                    std::ifstream in(prefix + ".field.json");
                    if (!in) throw std::runtime_error("evaluator wrote no field file");
                    nlohmann::json j;
                    in >> j;
                    return field_from_json(j);
                }();
                row.j_qs_value = j_qs(f);
                std::ifstream in(prefix + ".scalars.json");
                if (!in) throw std::runtime_error("evaluator wrote no scalars file");
                nlohmann::json scal;
                in >> scal;
                row.iota_measured = scal.at("mean_iota").get<double>();
                row.c_iota = (*row.iota_measured - row.target.mean_iota) / row.target.mean_iota;
            }
            row.valid = true;
        } catch (const std::exception& e) {
            row.valid = false;
            row.error = e.what();
            row.aspect_measured.reset();
            row.c_aspect.reset();
            row.iota_measured.reset();
            row.c_iota.reset();
            row.j_qs_value.reset();
        }
    };

    if (use_command) {
        for (std::size_t i = 0; i < rows.size(); ++i) eval_one(i);
    } else {
        parallel_for(rows.size(), eval_one);
    }
    return rows;
}

inline std::string evaluation_csv_header() {
    return "id,nfp,helicity,aspect_target,iota_target,aspect_measured,c_aspect,"
           "iota_measured,c_iota,j_qs,valid,error";
}

inline void write_evaluation_csv(const std::vector<EvaluationRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << evaluation_csv_header() << '\n';
    auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    for (const EvaluationRow& r : rows) {
        out << r.id << ',' << r.target.nfp << ',' << r.target.helicity << ','
            << format_double(r.target.aspect_ratio) << ',' << format_double(r.target.mean_iota)
            << ',' << opt(r.aspect_measured) << ',' << opt(r.c_aspect) << ','
            << opt(r.iota_measured) << ',' << opt(r.c_iota) << ',' << opt(r.j_qs_value) << ','
            << (r.valid ? 1 : 0) << ',' << r.error << '\n';
    }
}

inline std::vector<EvaluationRow> read_evaluation_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != evaluation_csv_header())
        throw std::runtime_error(path + ": unexpected evaluation CSV header");
    std::vector<EvaluationRow> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        // the error column is last and may contain commas: split only 11 times
        std::vector<std::string> cols;
        std::size_t start = 0;
        for (int k = 0; k < 11; ++k) {
            std::size_t pos = line.find(',', start);
            if (pos == std::string::npos)
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": expected 12 columns");
            cols.push_back(line.substr(start, pos - start));
            start = pos + 1;
        }
        cols.push_back(line.substr(start));
        auto opt = [](const std::string& s) -> std::optional<double> {
            if (s.empty()) return std::nullopt;
            return parse_double(s);
        };
        EvaluationRow r;
        r.id = cols[0];
        r.target.nfp = static_cast<int>(parse_double(cols[1]));
        r.target.helicity = static_cast<int>(parse_double(cols[2]));
        r.target.aspect_ratio = parse_double(cols[3]);
        r.target.mean_iota = parse_double(cols[4]);
        r.aspect_measured = opt(cols[5]);
        r.c_aspect = opt(cols[6]);
        r.iota_measured = opt(cols[7]);
        r.c_iota = opt(cols[8]);
        r.j_qs_value = opt(cols[9]);
        r.valid = cols[10] == "1";
        r.error = cols[11];
        rows.push_back(std::move(r));
    }
    return rows;
}

// Linear interpolation between order statistics, h = (n-1)p.
inline double quantile(std::vector<double> values, double p) {
    if (values.empty()) throw std::invalid_argument("quantile of empty set");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * p;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= values.size()) return values.back();
    const double frac = h - std::floor(h);
    return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
}

struct MetricSummary {
    int count = 0;
    double q25 = 0.0, q50 = 0.0, q75 = 0.0;
    double ok_fraction = 0.0;  // fraction below the configured threshold
};

struct GroupSummary {
    ConditionRow condition;
    int n_samples = 0;
    int n_valid = 0;
    double invalid_fraction = 0.0;
    std::optional<MetricSummary> abs_c_aspect;
    std::optional<MetricSummary> abs_c_iota;
    std::optional<MetricSummary> j_qs_value;
};

namespace detail {

inline std::optional<MetricSummary> summarize_metric(const std::vector<double>& vals,
                                                     double threshold) {
    if (vals.empty()) return std::nullopt;
    MetricSummary m;
    m.count = static_cast<int>(vals.size());
    m.q25 = quantile(vals, 0.25);
    m.q50 = quantile(vals, 0.50);
    m.q75 = quantile(vals, 0.75);
    int ok = 0;
    for (double v : vals)
        if (v < threshold) ++ok;
    m.ok_fraction = static_cast<double>(ok) / static_cast<double>(vals.size());
    return m;
}

}  // namespace detail

// Quantiles per condition group over valid rows; the invalid fraction is always
// reported so failed evaluations are never silently dropped.
inline std::vector<GroupSummary> summarize(const std::vector<EvaluationRow>& rows,
                                           double c_threshold = 0.05,
                                           double jqs_threshold = 0.01) {
    std::vector<ConditionRow> keys;
    for (const auto& r : rows)
        if (std::find(keys.begin(), keys.end(), r.target) == keys.end()) keys.push_back(r.target);
    std::sort(keys.begin(), keys.end(), [](const ConditionRow& a, const ConditionRow& b) {
        return std::tie(a.nfp, a.helicity, a.aspect_ratio, a.mean_iota) <
               std::tie(b.nfp, b.helicity, b.aspect_ratio, b.mean_iota);
    });

    std::vector<GroupSummary> groups;
    for (const ConditionRow& key : keys) {
        GroupSummary g;
        g.condition = key;
        std::vector<double> ca, ci, jq;
        for (const auto& r : rows) {
            if (!(r.target == key)) continue;
            ++g.n_samples;
            if (!r.valid) continue;
            ++g.n_valid;
            if (r.c_aspect) ca.push_back(std::abs(*r.c_aspect));
            if (r.c_iota) ci.push_back(std::abs(*r.c_iota));
            if (r.j_qs_value) jq.push_back(*r.j_qs_value);
        }
        g.invalid_fraction =
            g.n_samples == 0
                ? 0.0
                : static_cast<double>(g.n_samples - g.n_valid) / static_cast<double>(g.n_samples);
        g.abs_c_aspect = detail::summarize_metric(ca, c_threshold);
        g.abs_c_iota = detail::summarize_metric(ci, c_threshold);
        g.j_qs_value = detail::summarize_metric(jq, jqs_threshold);
        groups.push_back(std::move(g));
    }
    return groups;
}

inline void write_summary_csv(const std::vector<GroupSummary>& groups, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "nfp,helicity,aspect_target,iota_target,n_samples,n_valid,invalid_fraction";
    for (const char* metric : {"abs_c_aspect", "abs_c_iota", "j_qs"})
        out << ',' << metric << "_q25," << metric << "_q50," << metric << "_q75," << metric
            << "_ok_fraction";
    out << '\n';
    auto emit = [&](const std::optional<MetricSummary>& m) {
        if (m)
            out << ',' << format_double(m->q25) << ',' << format_double(m->q50) << ','
                << format_double(m->q75) << ',' << format_double(m->ok_fraction);
        else
            out << ",,,,";
    };
    for (const GroupSummary& g : groups) {
        out << g.condition.nfp << ',' << g.condition.helicity << ','
            << format_double(g.condition.aspect_ratio) << ','
            << format_double(g.condition.mean_iota) << ',' << g.n_samples << ',' << g.n_valid
            << ',' << format_double(g.invalid_fraction);
        emit(g.abs_c_aspect);
        emit(g.abs_c_iota);
        emit(g.j_qs_value);
        out << '\n';
    }
}

// Samples written by `sample` reuse the dataset record schema so they can be fed
// straight back into `evaluate`.
inline Dataset generated_to_dataset(const std::vector<GeneratedSurface>& gen, Eigen::Index n_x) {
    Dataset ds;
    ds.n_x = n_x;
    for (const GeneratedSurface& g : gen) {
        Record r;
        r.id = g.id;
        r.features = g.coeffs;
        r.conditions = g.target.as_condition();
        ds.records.push_back(std::move(r));
    }
    return ds;
}

}  // namespace stellagen
