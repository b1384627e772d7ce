#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>

#include "stellagen/rng.hpp"
#include "stellagen/surface.hpp"

namespace sg = stellagen;
using sg::FourierSurface;

namespace {

// Random surface with mode amplitudes decaying away from the torus base shape,
// loosely mimicking an optimized-device coefficient vector.
FourierSurface random_surface(int nfp, int m_pol, int n_tor, std::uint64_t seed,
                              double amplitude = 0.05) {
    sg::Rng rng(seed);
    FourierSurface s(nfp, m_pol, n_tor);
    const double R = 1.0, r = 0.3;
    s.x(0, 0) = R;
    s.x(1, 0) = r;
    s.z(m_pol + 1, 0) = r;
    auto decay = [&](int i, int j) {
        const int mi = i <= m_pol ? i : i - m_pol;
        const int nj = j <= n_tor ? j : j - n_tor;
        return std::exp(-0.7 * (mi + nj));
    };
    for (int i = 0; i <= 2 * m_pol; ++i)
        for (int j = 0; j <= 2 * n_tor; ++j) {
            if (FourierSurface::x_legal(i, j, m_pol, n_tor) && !(i <= 1 && j == 0))
                s.x(i, j) += amplitude * r * decay(i, j) * (2.0 * rng.uniform() - 1.0);
            if (FourierSurface::yz_legal(i, j, m_pol, n_tor)) {
                s.y(i, j) += amplitude * r * decay(i, j) * (2.0 * rng.uniform() - 1.0);
                if (!(i == m_pol + 1 && j == 0))
                    s.z(i, j) += amplitude * r * decay(i, j) * (2.0 * rng.uniform() - 1.0);
            }
        }
    return s;
}

}  // namespace

TEST(FeatureLength, MatchesEnumeratedBasis) {
    EXPECT_EQ(sg::feature_length(10, 10), 661);
    EXPECT_EQ(sg::feature_length(0, 0), 1);   // only the constant xhat term survives
    EXPECT_EQ(sg::feature_length(1, 1), 13);  // xhat: 5, yhat: 4, z: 4

    // oracle: count legal (i, j) pairs directly
    for (int m : {0, 1, 2, 3, 10})
        for (int n : {0, 1, 2, 5, 10}) {
            int count = 0;
            for (int i = 0; i <= 2 * m; ++i)
                for (int j = 0; j <= 2 * n; ++j) {
                    count += FourierSurface::x_legal(i, j, m, n) ? 1 : 0;
                    count += FourierSurface::yz_legal(i, j, m, n) ? 2 : 0;
                }
            EXPECT_EQ(sg::feature_length(m, n), count) << "m=" << m << " n=" << n;
        }
}

TEST(PackUnpack, BijectionIsBitExact) {
    sg::Rng rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        const int m = 1 + static_cast<int>(rng.below(4));
        const int n = 1 + static_cast<int>(rng.below(4));
        Eigen::VectorXd v(sg::feature_length(m, n));
        for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = rng.normal();
        Eigen::VectorXd back = sg::pack(sg::unpack(v, 2, m, n));
        ASSERT_EQ(back.size(), v.size());
        for (Eigen::Index k = 0; k < v.size(); ++k)
            EXPECT_EQ(back[k], v[k]);  // bitwise
    }
}

TEST(PackUnpack, WrongLengthThrows) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(660);
    EXPECT_THROW(sg::unpack(v, 2, 10, 10), std::invalid_argument);
}

TEST(PackUnpack, ZeroVectorGivesDegenerateSurface) {
    FourierSurface s = sg::unpack(Eigen::VectorXd::Zero(661), 2, 10, 10);
    sg::Point3 p = sg::evaluate(s, 0.3, 0.7);  // evaluation allowed
    EXPECT_EQ(p.x, 0.0);
    EXPECT_EQ(p.y, 0.0);
    EXPECT_EQ(p.z, 0.0);
    EXPECT_THROW(sg::geometry(s), std::runtime_error);  // geometry rejects it
}

TEST(PackUnpack, ConstantTermGivesCircle) {
    FourierSurface s(1, 1, 1);
    s.x(0, 0) = 2.0;
    Eigen::VectorXd v = sg::pack(s);
    FourierSurface back = sg::unpack(v, 1, 1, 1);
    for (double theta : {0.0, 1.0, 2.5}) {
        sg::Point3 p = sg::evaluate(back, 0.0, theta);
        EXPECT_DOUBLE_EQ(p.x, 2.0);
        EXPECT_DOUBLE_EQ(p.y, 0.0);
        EXPECT_DOUBLE_EQ(p.z, 0.0);
        sg::Point3 q = sg::evaluate(back, std::numbers::pi / 2, theta);
        EXPECT_NEAR(q.x, 0.0, 1e-15);
        EXPECT_DOUBLE_EQ(q.y, 2.0);
    }
}

TEST(Evaluate, CircularTorusPoints) {
    FourierSurface torus = sg::make_torus(2.0, 0.5);
    sg::Point3 p = sg::evaluate(torus, 0.0, 0.0);
    EXPECT_NEAR(p.x, 2.5, 1e-15);
    EXPECT_NEAR(p.y, 0.0, 1e-15);
    EXPECT_NEAR(p.z, 0.0, 1e-15);

    sg::Point3 q = sg::evaluate(torus, std::numbers::pi / 2, 0.0);
    EXPECT_NEAR(q.x, 0.0, 1e-15);
    EXPECT_NEAR(q.y, 2.5, 1e-15);
    EXPECT_NEAR(q.z, 0.0, 1e-15);

    sg::Point3 r = sg::evaluate(torus, 0.0, std::numbers::pi);
    EXPECT_NEAR(r.x, 1.5, 1e-15);
    EXPECT_NEAR(r.z, 0.0, 1e-15);
}

TEST(Symmetry, StellaratorSymmetryOnRandomSurfaces) {
    sg::Rng rng(42);
    for (int rep = 0; rep < 100; ++rep) {
        const int nfp = 1 + static_cast<int>(rng.below(5));
        FourierSurface s = random_surface(nfp, 3, 3, 1000 + rep, 0.5);
        const double phi = rng.uniform(0.0, sg::kTwoPi);
        const double theta = rng.uniform(0.0, sg::kTwoPi);
        sg::Point3 a = sg::evaluate(s, phi, theta);
        sg::Point3 b = sg::evaluate(s, -phi, -theta);
        EXPECT_NEAR(a.x, b.x, 1e-12);
        EXPECT_NEAR(a.y, -b.y, 1e-12);
        EXPECT_NEAR(a.z, -b.z, 1e-12);
    }
}

TEST(Symmetry, NfpRotationPeriodicity) {
    sg::Rng rng(43);
    for (int rep = 0; rep < 100; ++rep) {
        const int nfp = 1 + static_cast<int>(rng.below(6));
        FourierSurface s = random_surface(nfp, 3, 2, 2000 + rep, 0.5);
        const double phi = rng.uniform(0.0, sg::kTwoPi);
        const double theta = rng.uniform(0.0, sg::kTwoPi);
        const double delta = sg::kTwoPi / nfp;
        sg::Point3 a = sg::evaluate(s, phi, theta);
        sg::Point3 b = sg::evaluate(s, phi + delta, theta);
        // rotate a by delta about Z
        const double c = std::cos(delta), sn = std::sin(delta);
        EXPECT_NEAR(a.x * c - a.y * sn, b.x, 1e-12);
        EXPECT_NEAR(a.x * sn + a.y * c, b.y, 1e-12);
        EXPECT_NEAR(a.z, b.z, 1e-12);
    }
}

TEST(Grid, TorusNormalNormMatchesAnalytic) {
    // ||n|| = r (R + r cos theta) for the circular torus
    FourierSurface torus = sg::make_torus(2.0, 0.5);
    sg::SurfaceGrid g = sg::build_grid(torus, 16, 16);
    EXPECT_NEAR(g.normal_norm(0, 0), 0.5 * (2.0 + 0.5), 1e-12);           // theta = 0
    EXPECT_NEAR(g.normal_norm(0, 8), 0.5 * (2.0 - 0.5), 1e-12);           // theta = pi
    for (int a = 0; a < g.n_phi; ++a)
        for (int b = 0; b < g.n_theta; ++b)
            EXPECT_NEAR(g.normal_norm(a, b), 0.5 * (2.0 + 0.5 * std::cos(g.theta[b])), 1e-12);
}

TEST(Grid, DegenerateSurfaceHasZeroNormals) {
    FourierSurface zero(2, 2, 2);
    sg::SurfaceGrid g = sg::build_grid(zero, 8, 8);
    EXPECT_EQ(g.normal_norm.maxCoeff(), 0.0);
}

TEST(Grid, RejectsTinyGrids) {
    EXPECT_THROW(sg::build_grid(sg::make_torus(2.0, 0.5), 3, 8), std::invalid_argument);
}

TEST(Geometry, CircularTorusAnalyticValues) {
    const double R = 2.0, r = 0.5;
    sg::GeometrySummary geo = sg::geometry(sg::make_torus(R, r));
    const double pi = std::numbers::pi;
    EXPECT_NEAR(geo.area, 4.0 * pi * pi * R * r, 1e-9);
    EXPECT_NEAR(geo.volume, 2.0 * pi * pi * R * r * r, 1e-9);
    EXPECT_NEAR(geo.minor_radius, r, 1e-10);
    EXPECT_NEAR(geo.major_radius, R, 1e-9);
    EXPECT_NEAR(geo.aspect_ratio, 4.0, 1e-9);
}

TEST(Geometry, ScaledTorusKeepsAspectRatio) {
    sg::GeometrySummary base = sg::geometry(sg::make_torus(2.0, 0.5));
    sg::GeometrySummary doubled = sg::geometry(sg::make_torus(4.0, 1.0));
    EXPECT_NEAR(doubled.aspect_ratio, 4.0, 1e-9);
    EXPECT_NEAR(doubled.volume, 8.0 * base.volume, 1e-7);
    EXPECT_NEAR(doubled.area, 4.0 * base.area, 1e-7);
}

TEST(Geometry, AspectRatioScaleInvarianceProperty) {
    for (int rep = 0; rep < 10; ++rep) {
        FourierSurface s = random_surface(3, 3, 3, 77 + rep);
        sg::GeometrySummary geo = sg::geometry(s);
        FourierSurface scaled = s;
        const double c = 0.5 + 0.25 * rep;
        for (double& v : scaled.x_coeffs()) v *= c;
        for (double& v : scaled.y_coeffs()) v *= c;
        for (double& v : scaled.z_coeffs()) v *= c;
        sg::GeometrySummary geos = sg::geometry(scaled);
        EXPECT_NEAR(geos.aspect_ratio / geo.aspect_ratio, 1.0, 1e-10);
    }
}

TEST(Geometry, GridRefinementConvergence) {
    // beyond the resolution rule, doubling the grid changes nothing measurable
    for (int rep = 0; rep < 5; ++rep) {
        FourierSurface s = random_surface(2, 4, 4, 555 + rep);
        const int np = sg::default_n_phi(s), nt = sg::default_n_theta(s);
        sg::GeometrySummary a = sg::geometry(s, np, nt);
        sg::GeometrySummary b = sg::geometry(s, 2 * np, 2 * nt);
        EXPECT_NEAR(a.area / b.area, 1.0, 1e-8);
        EXPECT_NEAR(a.volume / b.volume, 1.0, 1e-8);
        EXPECT_NEAR(a.aspect_ratio / b.aspect_ratio, 1.0, 1e-8);
    }
}

TEST(Geometry, QuasrLikeSurfaceMatchesRefinedQuadrature) {
    FourierSurface s = random_surface(3, 10, 10, 314, 0.03);
    sg::GeometrySummary base = sg::geometry(s);
    sg::GeometrySummary fine = sg::geometry(s, 4 * sg::default_n_phi(s), 4 * sg::default_n_theta(s));
    EXPECT_NEAR(base.aspect_ratio / fine.aspect_ratio, 1.0, 1e-6);
}

TEST(Geometry, InwardOrientationReported) {
    // negating the sin(theta) coefficient of z flips the normal orientation
    FourierSurface torus = sg::make_torus(2.0, 0.5);
    torus.z(2, 0) = -0.5;
    try {
        sg::geometry(torus);
        FAIL() << "expected inward-orientation error";
    } catch (const std::runtime_error& e) {
        EXPECT_NE(std::string(e.what()).find("inward"), std::string::npos);
    }
}

TEST(SurfaceIo, JsonRoundTrip) {
    FourierSurface s = random_surface(4, 3, 2, 99);
    const std::string path = testing::TempDir() + "surface_roundtrip.json";
    sg::write_surface_json(s, path);
    FourierSurface back = sg::read_surface_json(path);
    EXPECT_EQ(back.nfp(), s.nfp());
    EXPECT_EQ(back.m_pol(), s.m_pol());
    EXPECT_EQ(back.n_tor(), s.n_tor());
    EXPECT_EQ(back.x_coeffs(), s.x_coeffs());
    EXPECT_EQ(back.y_coeffs(), s.y_coeffs());
    EXPECT_EQ(back.z_coeffs(), s.z_coeffs());
    std::remove(path.c_str());
}

TEST(SurfaceIo, GridCsvExport) {
    sg::SurfaceGrid g = sg::build_grid(sg::make_torus(2.0, 0.5), 4, 4);
    const std::string path = testing::TempDir() + "grid.csv";
    sg::write_grid_csv(g, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "phi,theta,x,y,z,norm_n");
    int rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    EXPECT_EQ(rows, 16);
    std::remove(path.c_str());
}

TEST(CoefficientTables, IllegalIndexThrows) {
    FourierSurface s(2, 2, 2);
    EXPECT_THROW(s.x(0, 3), std::out_of_range);   // cos-theta row with sin-phi column
    EXPECT_THROW(s.y(0, 0), std::out_of_range);   // constant-constant is x-only
    EXPECT_THROW(s.z(3, 3), std::out_of_range);   // sin-sin block is x-only
    EXPECT_NO_THROW(s.x(3, 3));
    EXPECT_NO_THROW(s.y(0, 3));
    EXPECT_NO_THROW(s.z(3, 0));
}
