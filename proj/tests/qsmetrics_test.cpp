#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <numbers>

#include "stellagen/qsmetrics.hpp"
#include "stellagen/rng.hpp"
#include "stellagen/surface.hpp"

namespace sg = stellagen;

namespace {

// Band-limited test field sampled on its own uniform grid. Used both at base
// resolution and by the independent oracle below.
struct TestField {
    int nfp, helicity;
    std::vector<double> qa_amps, ripple_amps;  // cos(k theta), cos(k nfp phi)
    double b0 = 2.0;

    double B(double phi, double theta) const {
        double v = b0;
        for (std::size_t k = 0; k < qa_amps.size(); ++k)
            v += qa_amps[k] * std::cos((static_cast<double>(k) + 1.0) * theta);
        for (std::size_t k = 0; k < ripple_amps.size(); ++k)
            v += ripple_amps[k] * std::cos((static_cast<double>(k) + 1.0) * nfp * phi);
        return v;
    }
    double weight(double, double theta) const { return 1.0 + 0.3 * std::cos(theta); }

    sg::FieldOnSurface sample(int n_phi, int n_theta) const {
        sg::FieldOnSurface f;
        f.nfp = nfp;
        f.helicity = helicity;
        f.B.resize(n_phi, n_theta);
        f.weights.resize(n_phi, n_theta);
        for (int a = 0; a < n_phi; ++a)
            for (int b = 0; b < n_theta; ++b) {
                const double phi = sg::kTwoPi * a / n_phi, theta = sg::kTwoPi * b / n_theta;
                f.B(a, b) = B(phi, theta);
                f.weights(a, b) = weight(phi, theta);
            }
        return f;
    }
};

// Independent quadrature oracle: straightforward nested loops, no shared code
// with qs_projection. QA only (the helical case is checked by construction).
double jqs_oracle_qa(const TestField& tf, int n_phi, int n_theta) {
    std::vector<double> bqs(static_cast<std::size_t>(n_theta));
    for (int b = 0; b < n_theta; ++b) {
        double num = 0.0, den = 0.0;
        for (int a = 0; a < n_phi; ++a) {
            const double phi = sg::kTwoPi * a / n_phi, theta = sg::kTwoPi * b / n_theta;
            num += tf.B(phi, theta) * tf.weight(phi, theta);
            den += tf.weight(phi, theta);
        }
        bqs[static_cast<std::size_t>(b)] = num / den;
    }
    double num = 0.0, den = 0.0;
    for (int a = 0; a < n_phi; ++a)
        for (int b = 0; b < n_theta; ++b) {
            const double phi = sg::kTwoPi * a / n_phi, theta = sg::kTwoPi * b / n_theta;
            const double w = tf.weight(phi, theta);
            const double diff = tf.B(phi, theta) - bqs[static_cast<std::size_t>(b)];
            num += diff * diff * w;
            den += bqs[static_cast<std::size_t>(b)] * bqs[static_cast<std::size_t>(b)] * w;
        }
    return std::sqrt(num / den);
}

}  // namespace

TEST(QsProjection, ConstantFieldIsItsOwnProjection) {
    sg::FieldOnSurface f;
    f.nfp = 3;
    f.helicity = 0;
    f.B = Eigen::MatrixXd::Constant(16, 16, 1.0);
    f.weights = Eigen::MatrixXd::Constant(16, 16, 0.7);
    Eigen::MatrixXd proj = sg::qs_projection(f);
    EXPECT_NEAR((proj.array() - 1.0).abs().maxCoeff(), 0.0, 1e-15);
    EXPECT_NEAR(sg::j_qs(f), 0.0, 1e-12);
}

TEST(QsProjection, ThetaOnlyFieldIsExactlyQuasiaxisymmetric) {
    sg::FieldOnSurface f;
    f.nfp = 2;
    f.helicity = 0;
    const int np = 24, nt = 20;
    f.B.resize(np, nt);
    f.weights.resize(np, nt);
    for (int a = 0; a < np; ++a)
        for (int b = 0; b < nt; ++b) {
            const double theta = sg::kTwoPi * b / nt;
            f.B(a, b) = 1.5 + 0.2 * std::cos(theta);
            f.weights(a, b) = 1.0 + 0.4 * std::cos(theta);  // axisymmetric torus weight
        }
    Eigen::MatrixXd proj = sg::qs_projection(f);
    EXPECT_NEAR((proj - f.B).cwiseAbs().maxCoeff(), 0.0, 1e-13);
    EXPECT_NEAR(sg::j_qs(f), 0.0, 1e-13);
}

TEST(QsProjection, HelicalFieldConstantAlongLines) {
    // B = 1 + 0.1 cos(theta - nfp phi) with uniform weights: the projection
    // reproduces B, since the field is constant along each helical line.
    for (int nfp : {1, 2, 4}) {
        sg::FieldOnSurface f;
        f.nfp = nfp;
        f.helicity = 1;
        const int np = 16, nt = 32;  // stride = nfp*nt/np integral for these choices
        f.B.resize(np, nt);
        f.weights = Eigen::MatrixXd::Constant(np, nt, 1.0);
        for (int a = 0; a < np; ++a)
            for (int b = 0; b < nt; ++b) {
                const double phi = sg::kTwoPi * a / np, theta = sg::kTwoPi * b / nt;
                f.B(a, b) = 1.0 + 0.1 * std::cos(theta - nfp * phi);
            }
        Eigen::MatrixXd proj = sg::qs_projection(f);
        EXPECT_NEAR((proj - f.B).cwiseAbs().maxCoeff(), 0.0, 1e-10) << "nfp=" << nfp;
        EXPECT_NEAR(sg::j_qs(f), 0.0, 1e-10);
    }
}

TEST(QsProjection, NonClosingHelicalGridThrows) {
    sg::FieldOnSurface f;
    f.nfp = 3;
    f.helicity = 1;
    f.B = Eigen::MatrixXd::Constant(16, 10, 1.0);  // 3*10 not divisible by 16
    f.weights = Eigen::MatrixXd::Constant(16, 10, 1.0);
    try {
        sg::qs_projection(f);
        FAIL() << "expected non-closing grid error";
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("n_theta"), std::string::npos);
    }
}

TEST(Jqs, AxisymmetricTorusRippleHasClosedForm) {
    // B = 1 + 0.1 cos(nfp phi), theta-only weights: J_QS = 0.1 / sqrt(2).
    sg::FieldOnSurface f;
    f.nfp = 2;
    f.helicity = 0;
    const int np = 32, nt = 24;
    f.B.resize(np, nt);
    f.weights.resize(np, nt);
    for (int a = 0; a < np; ++a)
        for (int b = 0; b < nt; ++b) {
            const double phi = sg::kTwoPi * a / np, theta = sg::kTwoPi * b / nt;
            f.B(a, b) = 1.0 + 0.1 * std::cos(f.nfp * phi);
            f.weights(a, b) = 0.5 * (2.0 + 0.5 * std::cos(theta));
        }
    EXPECT_NEAR(sg::j_qs(f), 0.1 / std::numbers::sqrt2, 1e-9);
}

TEST(Jqs, MatchesIndependentOracleOnBandLimitedFields) {
    sg::Rng rng(7);
    for (int rep = 0; rep < 5; ++rep) {
        TestField tf;
        tf.nfp = 1 + static_cast<int>(rng.below(4));
        tf.helicity = 0;
        tf.qa_amps = {0.1 * rng.uniform(), 0.05 * rng.uniform(), 0.02 * rng.uniform()};
        tf.ripple_amps = {0.05 * rng.uniform(), 0.02 * rng.uniform()};
        const int np = 32, nt = 28;
        const double base = sg::j_qs(tf.sample(np, nt));
        const double oracle = jqs_oracle_qa(tf, 8 * np, 8 * nt);
        EXPECT_NEAR(base / oracle, 1.0, 1e-8) << "rep=" << rep;
    }
}

TEST(Jqs, InvariantUnderUniformFieldScaling) {
    TestField tf;
    tf.nfp = 2;
    tf.helicity = 0;
    tf.qa_amps = {0.1, 0.03};
    tf.ripple_amps = {0.04};
    sg::FieldOnSurface f = tf.sample(32, 24);
    const double j1 = sg::j_qs(f);
    f.B *= 7.5;
    const double j2 = sg::j_qs(f);
    EXPECT_NEAR(j1 / j2, 1.0, 1e-12);
}

TEST(Jqs, DecompositionAndOrthogonality) {
    TestField tf;
    tf.nfp = 3;
    tf.helicity = 0;
    tf.qa_amps = {0.15, 0.05};
    tf.ripple_amps = {0.06, 0.02};
    sg::FieldOnSurface f = tf.sample(30, 26);
    sg::QsReport rep = sg::qs_report(f);
    EXPECT_NEAR((rep.b_qs + rep.b_nonqs - f.B).cwiseAbs().maxCoeff(), 0.0, 1e-12);
    const double inner = (rep.b_qs.array() * rep.b_nonqs.array() * f.weights.array()).sum() *
                         (sg::kTwoPi / f.n_phi()) * (sg::kTwoPi / f.n_theta());
    EXPECT_NEAR(inner, 0.0, 1e-10);
    EXPECT_GE(rep.j_qs, 0.0);
}

TEST(Jqs, GridRefinementConvergence) {
    TestField tf;
    tf.nfp = 2;
    tf.helicity = 0;
    tf.qa_amps = {0.12, 0.04, 0.01};
    tf.ripple_amps = {0.05, 0.01};
    const double base = sg::j_qs(tf.sample(32, 28));
    const double fine = sg::j_qs(tf.sample(64, 56));
    EXPECT_NEAR(base / fine, 1.0, 1e-6);
}

TEST(Jqs, HelicalFieldOnTorusGridNearZero) {
    sg::SurfaceGrid g = sg::build_grid(sg::make_torus(1.0, 0.3, 4), 48, 48);
    sg::FieldOnSurface f = sg::synthetic_field(g, 4, 1, 1.0, 0.1, 0.0);
    EXPECT_LT(sg::j_qs(f), 1e-10);
}

TEST(FieldValidation, RejectsBadTables) {
    sg::FieldOnSurface f;
    f.nfp = 2;
    f.helicity = 0;
    f.B = Eigen::MatrixXd::Constant(8, 8, 1.0);
    f.weights = Eigen::MatrixXd::Constant(8, 8, 1.0);
    f.B(3, 4) = -1.0;
    EXPECT_THROW(f.validate(), std::invalid_argument);
    f.B(3, 4) = 1.0;
    f.weights(0, 0) = 0.0;
    EXPECT_THROW(f.validate(), std::invalid_argument);
    f.weights(0, 0) = 1.0;
    f.helicity = 2;
    EXPECT_THROW(f.validate(), std::invalid_argument);
}

TEST(ConstraintErrors, SignedRelativeErrors) {
    auto [ca, ci] = sg::constraint_errors(4.2, 4.0, 0.3, 0.3);
    EXPECT_NEAR(ca, 0.05, 1e-15);
    EXPECT_EQ(ci, 0.0);
    auto [ca2, ci2] = sg::constraint_errors(3.8, 4.0, 0.25, 0.5);
    EXPECT_NEAR(ca2, -0.05, 1e-15);
    EXPECT_NEAR(ci2, -0.5, 1e-15);
    EXPECT_THROW(sg::constraint_errors(4.0, 0.0, 0.3, 0.3), std::invalid_argument);
}

TEST(FieldIo, JsonAndCsvRoundTrip) {
    TestField tf;
    tf.nfp = 2;
    tf.helicity = 1;
    tf.qa_amps = {0.1};
    tf.ripple_amps = {0.02};
    sg::FieldOnSurface f = tf.sample(8, 8);

    const std::string jpath = testing::TempDir() + "field.json";
    {
        std::ofstream out(jpath);
        out << sg::field_to_json(f).dump();
    }
    sg::FieldOnSurface fj = [&] {
        std::ifstream in(jpath);
        nlohmann::json j;
        in >> j;
        return sg::field_from_json(j);
    }();
    EXPECT_EQ(fj.nfp, f.nfp);
    EXPECT_EQ(fj.helicity, f.helicity);
    EXPECT_EQ((fj.B - f.B).cwiseAbs().maxCoeff(), 0.0);

    const std::string cpath = testing::TempDir() + "field.csv";
    sg::write_field_csv(f, cpath);
    sg::FieldOnSurface fc = sg::read_field_csv(cpath, f.nfp, f.helicity);
    EXPECT_EQ(fc.n_phi(), f.n_phi());
    EXPECT_EQ(fc.n_theta(), f.n_theta());
    EXPECT_EQ((fc.B - f.B).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ((fc.weights - f.weights).cwiseAbs().maxCoeff(), 0.0);
    std::remove(jpath.c_str());
    std::remove(cpath.c_str());
}
