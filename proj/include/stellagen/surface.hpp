#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stellagen/common.hpp"

namespace stellagen {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Tensor-Fourier boundary representation.
//
// The poloidal basis is w_i(theta) = {1, cos(1..m theta), sin(1..m theta)} and the
// toroidal basis is v_j(phi) = {1, cos(1..n nfp phi), sin(1..n nfp phi)}, with
// m = m_pol, n = n_tor. Stellarator symmetry restricts which (i, j) products are
// allowed in each component:
//
//   xhat: cos*cos block  (i in [0,m],    j in [0,n])     and sin*sin block (i in
//         [m+1,2m], j in [n+1,2n]),
//   yhat, z: cos*sin block (i in [0,m], j in [n+1,2n])   and sin*cos block (i in
//         [m+1,2m], j in [0,n]),
//
// and the Cartesian components follow by rotating (xhat, yhat) through phi:
//   x = xhat cos(phi) - yhat sin(phi),  y = xhat sin(phi) + yhat cos(phi).
//
// Only coefficients inside the legal blocks are stored; the flat layout within
// each table is row-major over the legal index set, and pack() concatenates the
// x, y, z tables in that order.
class FourierSurface {
  public:
    FourierSurface(int nfp, int m_pol, int n_tor)
        : nfp_(nfp), m_pol_(m_pol), n_tor_(n_tor) {
        if (nfp < 1) throw std::invalid_argument("nfp must be >= 1");
        if (m_pol < 0 || n_tor < 0) throw std::invalid_argument("m_pol, n_tor must be >= 0");
        x_.assign(x_table_size(m_pol, n_tor), 0.0);
        y_.assign(yz_table_size(m_pol, n_tor), 0.0);
        z_.assign(yz_table_size(m_pol, n_tor), 0.0);
    }

    int nfp() const { return nfp_; }
    int m_pol() const { return m_pol_; }
    int n_tor() const { return n_tor_; }

    static std::size_t x_table_size(int m, int n) {
        return static_cast<std::size_t>((m + 1) * (n + 1) + m * n);
    }
    static std::size_t yz_table_size(int m, int n) {
        return static_cast<std::size_t>((m + 1) * n + m * (n + 1));
    }

    // i in [0, 2 m_pol], j in [0, 2 n_tor]; throws for indices outside the legal blocks.
    double& x(int i, int j) { return x_[x_offset(i, j)]; }
    double& y(int i, int j) { return y_[yz_offset(i, j)]; }
    double& z(int i, int j) { return z_[yz_offset(i, j)]; }
    double x(int i, int j) const { return x_[x_offset(i, j)]; }
    double y(int i, int j) const { return y_[yz_offset(i, j)]; }
    double z(int i, int j) const { return z_[yz_offset(i, j)]; }

    const std::vector<double>& x_coeffs() const { return x_; }
    const std::vector<double>& y_coeffs() const { return y_; }
    const std::vector<double>& z_coeffs() const { return z_; }
    std::vector<double>& x_coeffs() { return x_; }
    std::vector<double>& y_coeffs() { return y_; }
    std::vector<double>& z_coeffs() { return z_; }

    // Dense (2m+1) x (2n+1) views with zeros at illegal indices, used for grid
    // evaluation as basis-matrix products.
    Eigen::MatrixXd dense_x() const {
        Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2 * m_pol_ + 1, 2 * n_tor_ + 1);
        for (int i = 0; i <= 2 * m_pol_; ++i)
            for (int j = 0; j <= 2 * n_tor_; ++j)
                if (x_legal(i, j, m_pol_, n_tor_)) d(i, j) = x(i, j);
        return d;
    }
    Eigen::MatrixXd dense_y() const { return dense_yz(y_); }
    Eigen::MatrixXd dense_z() const { return dense_yz(z_); }

    static bool x_legal(int i, int j, int m, int n) {
        return (i <= m && j <= n) || (i > m && i <= 2 * m && j > n && j <= 2 * n);
    }
    static bool yz_legal(int i, int j, int m, int n) {
        return (i <= m && j > n && j <= 2 * n) || (i > m && i <= 2 * m && j <= n);
    }

  private:
    std::size_t x_offset(int i, int j) const {
        const int m = m_pol_, n = n_tor_;
        if (i >= 0 && i <= m && j >= 0 && j <= n)
            return static_cast<std::size_t>(i * (n + 1) + j);
        if (i > m && i <= 2 * m && j > n && j <= 2 * n)
            return static_cast<std::size_t>((m + 1) * (n + 1) + (i - m - 1) * n + (j - n - 1));
        throw std::out_of_range("x coefficient index (" + std::to_string(i) + "," +
                                std::to_string(j) + ") outside legal blocks");
    }
    std::size_t yz_offset(int i, int j) const {
        const int m = m_pol_, n = n_tor_;
        if (i >= 0 && i <= m && j > n && j <= 2 * n)
            return static_cast<std::size_t>(i * n + (j - n - 1));
        if (i > m && i <= 2 * m && j >= 0 && j <= n)
            return static_cast<std::size_t>((m + 1) * n + (i - m - 1) * (n + 1) + j);
        throw std::out_of_range("y/z coefficient index (" + std::to_string(i) + "," +
                                std::to_string(j) + ") outside legal blocks");
    }
    Eigen::MatrixXd dense_yz(const std::vector<double>& tab) const {
        Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2 * m_pol_ + 1, 2 * n_tor_ + 1);
        std::size_t k = 0;
        for (int i = 0; i <= m_pol_; ++i)
            for (int j = n_tor_ + 1; j <= 2 * n_tor_; ++j) d(i, j) = tab[k++];
        for (int i = m_pol_ + 1; i <= 2 * m_pol_; ++i)
            for (int j = 0; j <= n_tor_; ++j) d(i, j) = tab[k++];
        return d;
    }

    int nfp_, m_pol_, n_tor_;
    std::vector<double> x_, y_, z_;
};

// Flat coefficient-vector length for given mode orders; 661 for (10, 10).
inline int feature_length(int m_pol, int n_tor) {
    if (m_pol < 0 || n_tor < 0) throw std::invalid_argument("m_pol, n_tor must be >= 0");
    return static_cast<int>(FourierSurface::x_table_size(m_pol, n_tor) +
                            2 * FourierSurface::yz_table_size(m_pol, n_tor));
}

inline Eigen::VectorXd pack(const FourierSurface& s) {
    Eigen::VectorXd v(feature_length(s.m_pol(), s.n_tor()));
    Eigen::Index k = 0;
    for (double c : s.x_coeffs()) v[k++] = c;
    for (double c : s.y_coeffs()) v[k++] = c;
    for (double c : s.z_coeffs()) v[k++] = c;
    return v;
}

inline FourierSurface unpack(const Eigen::VectorXd& v, int nfp, int m_pol, int n_tor) {
    const int want = feature_length(m_pol, n_tor);
    if (v.size() != want)
        throw std::invalid_argument("coefficient vector has length " + std::to_string(v.size()) +
                                    ", expected " + std::to_string(want));
    FourierSurface s(nfp, m_pol, n_tor);
    Eigen::Index k = 0;
    for (double& c : s.x_coeffs()) c = v[k++];
    for (double& c : s.y_coeffs()) c = v[k++];
    for (double& c : s.z_coeffs()) c = v[k++];
    return s;
}

namespace detail {

// Basis values w_i(theta) (poloidal) or v_j(nfp*phi) (toroidal) and derivatives.
inline void basis_row(double angle, int order, int mult, Eigen::VectorXd& val,
                      Eigen::VectorXd& der) {
    val.resize(2 * order + 1);
    der.resize(2 * order + 1);
    val[0] = 1.0;
    der[0] = 0.0;
    for (int k = 1; k <= order; ++k) {
        const double a = k * mult * angle;
        const double c = std::cos(a), s = std::sin(a);
        val[k] = c;
        der[k] = -k * mult * s;
        val[order + k] = s;
        der[order + k] = k * mult * c;
    }
}

}  // namespace detail

struct Point3 {
    double x, y, z;
};

inline Point3 evaluate(const FourierSurface& s, double phi, double theta) {
    Eigen::VectorXd w, dw, v, dv;
    detail::basis_row(theta, s.m_pol(), 1, w, dw);
    detail::basis_row(phi, s.n_tor(), s.nfp(), v, dv);
    const double xhat = w.dot(s.dense_x() * v);
    const double yhat = w.dot(s.dense_y() * v);
    const double zval = w.dot(s.dense_z() * v);
    const double c = std::cos(phi), sn = std::sin(phi);
    return {xhat * c - yhat * sn, xhat * sn + yhat * c, zval};
}

// Uniform periodic (phi, theta) grid with points, analytic tangents, normals
// n = dr/dphi x dr/dtheta and their norms. Matrices are n_phi x n_theta with
// phi along rows.
struct SurfaceGrid {
    int n_phi = 0, n_theta = 0;
    Eigen::VectorXd phi, theta;
    Eigen::MatrixXd x, y, z;
    Eigen::MatrixXd x_phi, y_phi, z_phi;
    Eigen::MatrixXd x_theta, y_theta, z_theta;
    Eigen::MatrixXd n_x, n_y, n_z;
    Eigen::MatrixXd normal_norm;
};

inline SurfaceGrid build_grid(const FourierSurface& s, int n_phi, int n_theta) {
    if (n_phi < 4 || n_theta < 4) throw std::invalid_argument("grid needs n_phi, n_theta >= 4");
    SurfaceGrid g;
    g.n_phi = n_phi;
    g.n_theta = n_theta;
    g.phi.resize(n_phi);
    g.theta.resize(n_theta);
    for (int a = 0; a < n_phi; ++a) g.phi[a] = kTwoPi * a / n_phi;
    for (int b = 0; b < n_theta; ++b) g.theta[b] = kTwoPi * b / n_theta;

    const int m = s.m_pol(), n = s.n_tor();
    Eigen::MatrixXd Wt(n_theta, 2 * m + 1), dWt(n_theta, 2 * m + 1);
    Eigen::MatrixXd Vp(n_phi, 2 * n + 1), dVp(n_phi, 2 * n + 1);
    Eigen::VectorXd val, der;
    for (int b = 0; b < n_theta; ++b) {
        detail::basis_row(g.theta[b], m, 1, val, der);
        Wt.row(b) = val;
        dWt.row(b) = der;
    }
    for (int a = 0; a < n_phi; ++a) {
        detail::basis_row(g.phi[a], n, s.nfp(), val, der);
        Vp.row(a) = val;
        dVp.row(a) = der;
    }

    const Eigen::MatrixXd X = s.dense_x(), Y = s.dense_y(), Z = s.dense_z();
    // grid(a, b) = sum_ij C(i, j) w_i(theta_b) v_j(phi_a)
    auto grid_of = [&](const Eigen::MatrixXd& C, const Eigen::MatrixXd& V,
                       const Eigen::MatrixXd& W) -> Eigen::MatrixXd {
        return V * C.transpose() * W.transpose();
    };
    Eigen::MatrixXd xh = grid_of(X, Vp, Wt), xh_p = grid_of(X, dVp, Wt), xh_t = grid_of(X, Vp, dWt);
    Eigen::MatrixXd yh = grid_of(Y, Vp, Wt), yh_p = grid_of(Y, dVp, Wt), yh_t = grid_of(Y, Vp, dWt);
    g.z = grid_of(Z, Vp, Wt);
    g.z_phi = grid_of(Z, dVp, Wt);
    g.z_theta = grid_of(Z, Vp, dWt);

    Eigen::ArrayXd cphi = g.phi.array().cos(), sphi = g.phi.array().sin();
    auto rowscale = [&](const Eigen::MatrixXd& M, const Eigen::ArrayXd& f) -> Eigen::MatrixXd {
        return (M.array().colwise() * f).matrix();
    };
    g.x = rowscale(xh, cphi) - rowscale(yh, sphi);
    g.y = rowscale(xh, sphi) + rowscale(yh, cphi);
    // d/dphi includes the frame rotation term.
    g.x_phi = rowscale(xh_p, cphi) - rowscale(yh_p, sphi) - g.y;
    g.y_phi = rowscale(xh_p, sphi) + rowscale(yh_p, cphi) + g.x;
    g.x_theta = rowscale(xh_t, cphi) - rowscale(yh_t, sphi);
    g.y_theta = rowscale(xh_t, sphi) + rowscale(yh_t, cphi);

    g.n_x = g.y_phi.cwiseProduct(g.z_theta) - g.z_phi.cwiseProduct(g.y_theta);
    g.n_y = g.z_phi.cwiseProduct(g.x_theta) - g.x_phi.cwiseProduct(g.z_theta);
    g.n_z = g.x_phi.cwiseProduct(g.y_theta) - g.y_phi.cwiseProduct(g.x_theta);
    g.normal_norm = (g.n_x.array().square() + g.n_y.array().square() + g.n_z.array().square())
                        .sqrt()
                        .matrix();
    return g;
}

// Over-resolved defaults so the periodic trapezoid rule is spectrally converged.
inline int default_n_phi(const FourierSurface& s) { return 4 * s.n_tor() * s.nfp() + 16; }
inline int default_n_theta(const FourierSurface& s) { return 4 * s.m_pol() + 16; }

struct GeometrySummary {
    double area = 0.0;
    double volume = 0.0;
    double minor_radius = 0.0;
    double major_radius = 0.0;
    double aspect_ratio = 0.0;
};

// area   = integral of ||n|| dphi dtheta
// volume = divergence theorem, integral of (r . n)/3 dphi dtheta
// minor radius r = sqrt(mean cross-sectional area / pi), where the mean
//   cross-sectional area over geometric toroidal angle Phi = atan2(y, x) is
//   (1/2pi) * integral of R (z_theta Phi_phi - z_phi Phi_theta) dphi dtheta
// major radius R = volume / (2 pi^2 r^2),  aspect ratio A = R / r.
// For a circular torus these reduce to the usual R, r, and A = R/r.
inline GeometrySummary geometry_from_grid(const SurfaceGrid& g) {
    const double cell = (kTwoPi / g.n_phi) * (kTwoPi / g.n_theta);
    const double mean_norm = g.normal_norm.mean();
    if (!(mean_norm > 0.0) || g.normal_norm.minCoeff() <= 1e-12 * mean_norm)
        throw std::runtime_error("degenerate surface: vanishing normal on grid");

    GeometrySummary out;
    out.area = g.normal_norm.sum() * cell;

    const double volume =
        (g.x.cwiseProduct(g.n_x) + g.y.cwiseProduct(g.n_y) + g.z.cwiseProduct(g.n_z)).sum() *
        cell / 3.0;
    if (!(volume > 0.0))
        throw std::runtime_error("non-positive volume: surface normals point inward");
    out.volume = volume;

    Eigen::ArrayXXd R2 = g.x.array().square() + g.y.array().square();
    if (R2.minCoeff() <= 0.0)
        throw std::runtime_error("degenerate surface: touches the Z axis");
    Eigen::ArrayXXd R = R2.sqrt();
    Eigen::ArrayXXd phi_p = (g.x.array() * g.y_phi.array() - g.y.array() * g.x_phi.array()) / R2;
    Eigen::ArrayXXd phi_t = (g.x.array() * g.y_theta.array() - g.y.array() * g.x_theta.array()) / R2;
    const double mean_xsection =
        (R * (g.z_theta.array() * phi_p - g.z_phi.array() * phi_t)).sum() * cell / kTwoPi;
    if (!(mean_xsection > 0.0))
        throw std::runtime_error("non-positive cross-sectional area");

    out.minor_radius = std::sqrt(mean_xsection / std::numbers::pi);
    out.major_radius = volume / (2.0 * std::numbers::pi * std::numbers::pi *
                                 out.minor_radius * out.minor_radius);
    out.aspect_ratio = out.major_radius / out.minor_radius;
    return out;
}

inline GeometrySummary geometry(const FourierSurface& s, int n_phi = 0, int n_theta = 0) {
    if (n_phi == 0) n_phi = default_n_phi(s);
    if (n_theta == 0) n_theta = default_n_theta(s);
    return geometry_from_grid(build_grid(s, n_phi, n_theta));
}

inline nlohmann::json surface_to_json(const FourierSurface& s) {
    return nlohmann::json{{"nfp", s.nfp()},
                          {"m_pol", s.m_pol()},
                          {"n_tor", s.n_tor()},
                          {"x_coeffs", s.x_coeffs()},
                          {"y_coeffs", s.y_coeffs()},
                          {"z_coeffs", s.z_coeffs()}};
}

inline FourierSurface surface_from_json(const nlohmann::json& j) {
    FourierSurface s(j.at("nfp").get<int>(), j.at("m_pol").get<int>(), j.at("n_tor").get<int>());
    auto fill = [](std::vector<double>& dst, const nlohmann::json& src, const char* name) {
        std::vector<double> v = src.get<std::vector<double>>();
        if (v.size() != dst.size())
            throw std::runtime_error(std::string(name) + " has wrong length");
        dst = std::move(v);
    };
    fill(s.x_coeffs(), j.at("x_coeffs"), "x_coeffs");
    fill(s.y_coeffs(), j.at("y_coeffs"), "y_coeffs");
    fill(s.z_coeffs(), j.at("z_coeffs"), "z_coeffs");
    return s;
}

inline void write_surface_json(const FourierSurface& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << surface_to_json(s).dump(2) << '\n';
}

inline FourierSurface read_surface_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    in >> j;
    return surface_from_json(j);
}

// CSV export of grid samples for external plotting: phi,theta,x,y,z,norm_n.
inline void write_grid_csv(const SurfaceGrid& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "phi,theta,x,y,z,norm_n\n";
    for (int a = 0; a < g.n_phi; ++a)
        for (int b = 0; b < g.n_theta; ++b)
            out << format_double(g.phi[a]) << ',' << format_double(g.theta[b]) << ','
                << format_double(g.x(a, b)) << ',' << format_double(g.y(a, b)) << ','
                << format_double(g.z(a, b)) << ',' << format_double(g.normal_norm(a, b)) << '\n';
}

// Circular torus xhat = R + r cos(theta), z = r sin(theta); the standard analytic
// test case (area 4 pi^2 R r, volume 2 pi^2 R r^2, aspect ratio R/r).
inline FourierSurface make_torus(double major_radius, double minor_radius, int nfp = 1,
                                 int m_pol = 1, int n_tor = 1) {
    FourierSurface s(nfp, m_pol, n_tor);
    s.x(0, 0) = major_radius;
    s.x(1, 0) = minor_radius;           // cos(theta)
    s.z(m_pol + 1, 0) = minor_radius;   // sin(theta)
    return s;
}

}  // namespace stellagen
