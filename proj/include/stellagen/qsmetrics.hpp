#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "stellagen/common.hpp"
#include "stellagen/surface.hpp"

namespace stellagen {

// Field strength samples B and area-element weights ||n|| on a uniform periodic
// (phi, theta) grid, phi along rows. helicity N selects the symmetry direction:
// N = 0 averages over phi (quasiaxisymmetry), N = 1 averages along lines of
// constant eta = theta - N nfp phi (quasihelical symmetry).
struct FieldOnSurface {
    int nfp = 1;
    int helicity = 0;
    Eigen::MatrixXd B;        // n_phi x n_theta, tesla
    Eigen::MatrixXd weights;  // ||n||, same shape

    int n_phi() const { return static_cast<int>(B.rows()); }
    int n_theta() const { return static_cast<int>(B.cols()); }

    void validate() const {
        if (nfp < 1) throw std::invalid_argument("field: nfp must be >= 1");
        if (helicity != 0 && helicity != 1)
            throw std::invalid_argument("field: helicity must be 0 or 1");
        if (B.rows() != weights.rows() || B.cols() != weights.cols())
            throw std::invalid_argument("field: B and weight tables differ in shape");
        if (B.rows() < 2 || B.cols() < 2)
            throw std::invalid_argument("field: grid must be at least 2x2");
        if ((B.array() <= 0.0).any())
            throw std::invalid_argument("field: B must be positive everywhere");
        if ((weights.array() <= 0.0).any())
            throw std::invalid_argument("field: weights must be positive everywhere");
        if (!B.allFinite() || !weights.allFinite())
            throw std::invalid_argument("field: non-finite entries");
    }
};

struct QsReport {
    double j_qs = 0.0;
    Eigen::MatrixXd b_qs;
    Eigen::MatrixXd b_nonqs;
};

namespace detail {

// Poloidal index stride per phi step along a constant-helical-angle line. The
// line visits grid nodes exactly only when n_phi divides N*nfp*n_theta.
inline int helical_stride(const FieldOnSurface& f) {
    const long num = static_cast<long>(f.helicity) * f.nfp * f.n_theta();
    if (num % f.n_phi() != 0)
        throw std::invalid_argument(
            "helical averaging lines do not close on this grid: need n_phi to divide "
            "N*nfp*n_theta (e.g. choose n_theta = n_phi * k for integer k); got n_phi=" +
            std::to_string(f.n_phi()) + ", n_theta=" + std::to_string(f.n_theta()) +
            ", nfp=" + std::to_string(f.nfp));
    return static_cast<int>(num / f.n_phi());
}

}  // namespace detail

// Weighted average of B along the symmetry direction, broadcast back to the grid.
inline Eigen::MatrixXd qs_projection(const FieldOnSurface& f) {
    f.validate();
    const int np = f.n_phi(), nt = f.n_theta();
    Eigen::MatrixXd out(np, nt);
    if (f.helicity == 0) {
        for (int b = 0; b < nt; ++b) {
            const double num = f.B.col(b).dot(f.weights.col(b));
            const double den = f.weights.col(b).sum();
            out.col(b).setConstant(num / den);
        }
        return out;
    }
    const int stride = detail::helical_stride(f);
    for (int b0 = 0; b0 < nt; ++b0) {
        double num = 0.0, den = 0.0;
        for (int a = 0; a < np; ++a) {
            const int b = static_cast<int>((static_cast<long>(b0) + static_cast<long>(stride) * a) % nt);
            num += f.B(a, b) * f.weights(a, b);
            den += f.weights(a, b);
        }
        const double avg = num / den;
        for (int a = 0; a < np; ++a) {
            const int b = static_cast<int>((static_cast<long>(b0) + static_cast<long>(stride) * a) % nt);
            out(a, b) = avg;
        }
    }
    return out;
}

inline QsReport qs_report(const FieldOnSurface& f) {
    QsReport rep;
    rep.b_qs = qs_projection(f);
    rep.b_nonqs = f.B - rep.b_qs;
    const double num = (rep.b_nonqs.array().square() * f.weights.array()).sum();
    const double den = (rep.b_qs.array().square() * f.weights.array()).sum();
    if (!(den > 0.0)) throw std::runtime_error("J_QS denominator vanishes: B is identically zero");
    rep.j_qs = std::sqrt(num / den);
    return rep;
}

inline double j_qs(const FieldOnSurface& f) { return qs_report(f).j_qs; }

// Signed relative errors from the target values; the report layer applies |.|
// and the 5% threshold.
inline std::pair<double, double> constraint_errors(double aspect_ratio, double aspect_target,
                                                   double iota_bar, double iota_target) {
    if (aspect_target == 0.0 || iota_target == 0.0)
        throw std::invalid_argument("constraint targets must be nonzero");
    return {(aspect_ratio - aspect_target) / aspect_target,
            (iota_bar - iota_target) / iota_target};
}

inline nlohmann::json field_to_json(const FieldOnSurface& f) {
    std::vector<double> b(static_cast<std::size_t>(f.B.size()));
    std::vector<double> w(static_cast<std::size_t>(f.B.size()));
    std::size_t k = 0;
    for (int a = 0; a < f.n_phi(); ++a)
        for (int b_i = 0; b_i < f.n_theta(); ++b_i, ++k) {
            b[k] = f.B(a, b_i);
            w[k] = f.weights(a, b_i);
        }
    return nlohmann::json{{"nfp", f.nfp},        {"helicity", f.helicity},
                          {"n_phi", f.n_phi()},  {"n_theta", f.n_theta()},
                          {"B", b},              {"weights", w}};
}

inline FieldOnSurface field_from_json(const nlohmann::json& j) {
    FieldOnSurface f;
    f.nfp = j.at("nfp").get<int>();
    f.helicity = j.at("helicity").get<int>();
    const int np = j.at("n_phi").get<int>(), nt = j.at("n_theta").get<int>();
    auto b = j.at("B").get<std::vector<double>>();
    auto w = j.at("weights").get<std::vector<double>>();
    if (static_cast<long>(b.size()) != static_cast<long>(np) * nt || b.size() != w.size())
        throw std::runtime_error("field JSON: table sizes disagree with grid dimensions");
    f.B.resize(np, nt);
    f.weights.resize(np, nt);
    std::size_t k = 0;
    for (int a = 0; a < np; ++a)
        for (int b_i = 0; b_i < nt; ++b_i, ++k) {
            f.B(a, b_i) = b[k];
            f.weights(a, b_i) = w[k];
        }
    f.validate();
    return f;
}

// CSV rows phi,theta,B,norm_n in phi-major order over the full uniform grid.
inline void write_field_csv(const FieldOnSurface& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "phi,theta,B,norm_n\n";
    for (int a = 0; a < f.n_phi(); ++a)
        for (int b = 0; b < f.n_theta(); ++b)
            out << format_double(kTwoPi * a / f.n_phi()) << ','
                << format_double(kTwoPi * b / f.n_theta()) << ',' << format_double(f.B(a, b))
                << ',' << format_double(f.weights(a, b)) << '\n';
}

inline FieldOnSurface read_field_csv(const std::string& path, int nfp, int helicity) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("phi,theta,B,norm_n", 0) != 0)
        throw std::runtime_error(path + ": expected header phi,theta,B,norm_n");
    std::vector<double> phis, thetas, bs, ws;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto cols = split_csv_line(line);
        if (cols.size() != 4)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected 4 columns");
        phis.push_back(parse_double(cols[0]));
        thetas.push_back(parse_double(cols[1]));
        bs.push_back(parse_double(cols[2]));
        ws.push_back(parse_double(cols[3]));
    }
    if (bs.empty()) throw std::runtime_error(path + ": no field rows");
    // phi-major layout: theta cycles fastest.
    int nt = 1;
    while (nt < static_cast<int>(thetas.size()) && thetas[nt] > thetas[nt - 1]) ++nt;
    if (static_cast<int>(bs.size()) % nt != 0)
        throw std::runtime_error(path + ": rows do not form a full phi-major grid");
    const int np = static_cast<int>(bs.size()) / nt;
    FieldOnSurface f;
    f.nfp = nfp;
    f.helicity = helicity;
    f.B.resize(np, nt);
    f.weights.resize(np, nt);
    std::size_t k = 0;
    for (int a = 0; a < np; ++a)
        for (int b = 0; b < nt; ++b, ++k) {
            f.B(a, b) = bs[k];
            f.weights(a, b) = ws[k];
        }
    f.validate();
    return f;
}

// Synthetic analytic field on a surface grid: b0 + qs_amp*cos(theta - N nfp phi)
// plus an optional symmetry-breaking ripple. With ripple 0 the field is exactly
// quasisymmetric on the grid.
inline FieldOnSurface synthetic_field(const SurfaceGrid& g, int nfp, int helicity,
                                      double b0 = 1.0, double qs_amp = 0.1,
                                      double ripple = 0.0) {
    FieldOnSurface f;
    f.nfp = nfp;
    f.helicity = helicity;
    f.B.resize(g.n_phi, g.n_theta);
    f.weights = g.normal_norm;
    for (int a = 0; a < g.n_phi; ++a)
        for (int b = 0; b < g.n_theta; ++b) {
            const double eta = g.theta[b] - helicity * nfp * g.phi[a];
            f.B(a, b) = b0 + qs_amp * std::cos(eta) + ripple * std::cos(nfp * g.phi[a]);
        }
    f.validate();
    return f;
}

}  // namespace stellagen
