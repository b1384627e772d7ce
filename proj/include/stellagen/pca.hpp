#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace stellagen {

// Linear dimensionality reduction: mean-centered SVD, top-n_r right singular
// directions. Component rows are orthonormal with a deterministic sign
// convention (the largest-magnitude entry of each row is positive; first such
// entry wins ties), so repeated fits on identical data are bit-identical.
struct PcaModel {
    Eigen::VectorXd mean;                // n_x
    Eigen::MatrixXd components;          // n_r x n_x, orthonormal rows
    Eigen::VectorXd variance_spectrum;   // n_r, non-increasing (population convention)
    int n_r = 0;
    int n_x = 0;
};

inline PcaModel pca_fit(const Eigen::MatrixXd& data, int n_r) {
    const Eigen::Index rows = data.rows(), nx = data.cols();
    if (rows < 2) throw std::invalid_argument("pca_fit: need at least 2 rows");
    if (n_r < 1 || n_r > std::min<Eigen::Index>(rows - 1, nx))
        throw std::invalid_argument("pca_fit: n_r must lie in [1, min(rows-1, n_x)]");

    PcaModel m;
    m.n_r = n_r;
    m.n_x = static_cast<int>(nx);
    m.mean = data.colwise().mean();
    Eigen::MatrixXd centered = data.rowwise() - m.mean.transpose();

    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
    m.components = svd.matrixV().leftCols(n_r).transpose();
    m.variance_spectrum =
        svd.singularValues().head(n_r).array().square() / static_cast<double>(rows);

    for (int k = 0; k < n_r; ++k) {
        Eigen::Index imax = 0;
        m.components.row(k).cwiseAbs().maxCoeff(&imax);
        if (m.components(k, imax) < 0.0) m.components.row(k) = -m.components.row(k);
    }
    return m;
}

inline Eigen::VectorXd pca_encode(const PcaModel& m, const Eigen::VectorXd& x) {
    if (x.size() != m.mean.size()) throw std::invalid_argument("pca_encode: dimension mismatch");
    return m.components * (x - m.mean);
}

inline Eigen::VectorXd pca_decode(const PcaModel& m, const Eigen::VectorXd& code) {
    if (code.size() != m.components.rows())
        throw std::invalid_argument("pca_decode: dimension mismatch");
    return m.components.transpose() * code + m.mean;
}

inline Eigen::MatrixXd pca_encode_rows(const PcaModel& m, const Eigen::MatrixXd& data) {
    if (data.cols() != m.mean.size())
        throw std::invalid_argument("pca_encode_rows: dimension mismatch");
    return (data.rowwise() - m.mean.transpose()) * m.components.transpose();
}

// (n_r, cumulative explained-variance fraction) for n_r = 1..max_nr.
inline std::vector<std::pair<int, double>> explained_variance_curve(const Eigen::MatrixXd& data,
                                                                    int max_nr) {
    PcaModel m = pca_fit(data, max_nr);
    Eigen::MatrixXd centered = data.rowwise() - m.mean.transpose();
    const double total = centered.squaredNorm() / static_cast<double>(data.rows());
    std::vector<std::pair<int, double>> curve;
    double acc = 0.0;
    for (int k = 0; k < max_nr; ++k) {
        acc += m.variance_spectrum[k];
        curve.emplace_back(k + 1, total > 0.0 ? acc / total : 1.0);
    }
    return curve;
}

inline nlohmann::json pca_to_json(const PcaModel& m) {
    std::vector<std::vector<double>> comps(static_cast<std::size_t>(m.n_r));
    for (int k = 0; k < m.n_r; ++k)
        comps[static_cast<std::size_t>(k)] =
            std::vector<double>(m.components.row(k).begin(), m.components.row(k).end());
    return nlohmann::json{
        {"n_r", m.n_r},
        {"n_x", m.n_x},
        {"mean", std::vector<double>(m.mean.begin(), m.mean.end())},
        {"components", comps},  // row-major: one array per component
        {"variance_spectrum",
         std::vector<double>(m.variance_spectrum.begin(), m.variance_spectrum.end())}};
}

inline PcaModel pca_from_json(const nlohmann::json& j) {
    PcaModel m;
    m.n_r = j.at("n_r").get<int>();
    m.n_x = j.at("n_x").get<int>();
    auto mean = j.at("mean").get<std::vector<double>>();
    if (static_cast<int>(mean.size()) != m.n_x)
        throw std::runtime_error("pca checkpoint: mean length mismatch");
    m.mean = Eigen::Map<Eigen::VectorXd>(mean.data(), m.n_x);
    m.components.resize(m.n_r, m.n_x);
    const auto& comps = j.at("components");
    if (static_cast<int>(comps.size()) != m.n_r)
        throw std::runtime_error("pca checkpoint: component count mismatch");
    for (int k = 0; k < m.n_r; ++k) {
        auto row = comps[static_cast<std::size_t>(k)].get<std::vector<double>>();
        if (static_cast<int>(row.size()) != m.n_x)
            throw std::runtime_error("pca checkpoint: component length mismatch");
        m.components.row(k) = Eigen::Map<Eigen::VectorXd>(row.data(), m.n_x);
    }
    auto spec = j.at("variance_spectrum").get<std::vector<double>>();
    if (static_cast<int>(spec.size()) != m.n_r)
        throw std::runtime_error("pca checkpoint: spectrum length mismatch");
    m.variance_spectrum = Eigen::Map<Eigen::VectorXd>(spec.data(), m.n_r);
    return m;
}

inline void save_pca(const PcaModel& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << pca_to_json(m).dump() << '\n';
}

inline PcaModel load_pca(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    in >> j;
    return pca_from_json(j);
}

}  // namespace stellagen
