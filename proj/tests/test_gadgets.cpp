#include "zenoanneal/gadgets.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace zeno;

namespace {

constexpr double pi = std::numbers::pi;

DensityState superposition(const FockSpace& sp, std::size_t a, std::size_t b, cplx phase = 1.0) {
    Vector psi = Vector::Zero(static_cast<Eigen::Index>(sp.total_dim()));
    psi(static_cast<Eigen::Index>(a)) = 1 / std::numbers::sqrt2;
    psi(static_cast<Eigen::Index>(b)) = phase / std::numbers::sqrt2;
    return {sp, psi * psi.adjoint()};
}

Matrix diag_superop(const Eigen::VectorXcd& d) {
    const Matrix m = d.asDiagonal();
    return Eigen::kroneckerProduct(m.conjugate(), m).eval();
}

}  // namespace

TEST(OmegaTpa, IdentityPairRemovalAndCoherenceDecay) {
    const FockSpace sp({3});
    EXPECT_LT((omega_tpa(sp, 0, 0.0).matrix - identity_superop(sp).matrix).norm(), 1e-15);
    EXPECT_GE(omega_tpa(sp, 0, 10.0).apply(density_number_state(sp, {2})).matrix(0, 0).real(), 1 - 1e-8);
    const auto out = omega_tpa(sp, 0, 0.6).apply(superposition(sp, 1, 2));
    EXPECT_NEAR(out.matrix(1, 2).real(), 0.5 * std::exp(-0.6), 1e-12);
}

TEST(OmegaSfg, ConversionAngleEmptiesPairIncoherently) {
    const FockSpace sp({3});
    const auto s = omega_sfg(sp, 0, kConversionAngle);
    const auto out = s.apply(superposition(sp, 0, 2));
    EXPECT_NEAR(out.matrix(0, 0).real(), 1.0, 1e-12);
    EXPECT_LT(std::abs(out.matrix(0, 2)), 1e-12);
    EXPECT_LT(std::abs(out.matrix(2, 2)), 1e-12);
}

TEST(OmegaSfg, ReturnAngleFlipsPairSign) {
    const FockSpace sp({3});
    const auto out = omega_sfg(sp, 0, kReturnAngle).apply(superposition(sp, 0, 2));
    EXPECT_NEAR(out.matrix(2, 0).real(), -0.5, 1e-12);
    EXPECT_NEAR(out.matrix(2, 2).real(), 0.5, 1e-12);
}

TEST(OmegaSfg, LowStatesUnaffectedAtAnyAngle) {
    const FockSpace sp({3});
    for (double angle : {0.1, 0.4, kConversionAngle, 0.9, kReturnAngle}) {
        const auto out = omega_sfg(sp, 0, angle).apply(superposition(sp, 0, 1, cplx(0.3, 0.8) / std::abs(cplx(0.3, 0.8))));
        const auto in = superposition(sp, 0, 1, cplx(0.3, 0.8) / std::abs(cplx(0.3, 0.8)));
        EXPECT_LT((out.matrix - in.matrix).norm(), 1e-12) << angle;
    }
}

TEST(OmegaSfg, LiftsOntoMultiModeSpaces) {
    const FockSpace sp({3, 2});
    const auto out = omega_sfg(sp, 0, kConversionAngle).apply(density_number_state(sp, {2, 1}));
    EXPECT_NEAR(population(out, {0, 1}), 1.0, 1e-12);
}

TEST(DriveTpa, NoNonlinearityGivesLowFlip) {
    const FockSpace sp({31});
    const double c = 1.0;
    const auto out = omega_drive_tpa(sp, 0, {c, 0.0, 0.0, pi / (2 * c)}).apply(to_density(vacuum(sp)));
    EXPECT_NEAR(out.matrix(1, 1).real(), 0.20, 0.02);
}

TEST(DriveTpa, ZeroDisplacementReducesToTpa) {
    const FockSpace sp({3});
    const auto a = omega_drive_tpa(sp, 0, {0.0, 2.0, 0.0, 0.7}).matrix;
    EXPECT_LT((a - omega_tpa(sp, 0, 1.4).matrix).norm(), 1e-12);
}

TEST(DriveSfg, LosslessStrongCouplingFlipsNearlyPerfectly) {
    const FockSpace sp({5});
    const double c = 1.0;
    const auto out = omega_drive_sfg(sp, 0, {c, 10.0, 5.0, pi / (2 * c)}).apply(to_density(vacuum(sp)));
    EXPECT_GT(out.matrix(1, 1).real(), 0.98);
}

TEST(DriveSfg, NoNonlinearityIsDisplacement) {
    const FockSpace sp({5});
    const auto a = omega_dl_sfg(sp, 0, {0.8, 0.0, 0.0, 0.9}).matrix;
    const auto b = expm_dense(gen_displacement(sp, 0), 0.8 * 0.9).matrix;
    EXPECT_LT((a - b).norm(), 1e-12);
}

TEST(DriveSfg, JointEvolutionMatchesDenseGadget) {
    const FockSpace sp({5});
    const DriveParams p{1.0, 3.0, 4.0, 0.8};
    const auto a = evolve_dl_sfg(to_density(vacuum(sp)), p);
    const auto b = omega_dl_sfg(sp, 0, p).apply(to_density(vacuum(sp)));
    EXPECT_LT((a.matrix - b.matrix).norm(), 1e-10);
    EXPECT_THROW(omega_dl_sfg(sp, 0, {-1.0, 0.0, 0.0, 1.0}), NumericalError);
}

TEST(Beamsplitter, HongOuMandelBunching) {
    const FockSpace sp({3, 3});
    const Matrix u = beamsplitter(sp, 0, 1);
    EXPECT_LT((u.adjoint() * u - Matrix::Identity(9, 9)).cwiseAbs().maxCoeff(), 1e-12);
    const Vector out = u * number_state(sp, {1, 1}).amplitudes;
    EXPECT_LT(std::abs(out(static_cast<Eigen::Index>(sp.index({1, 1})))), 1e-12);
    EXPECT_NEAR(std::abs(out(static_cast<Eigen::Index>(sp.index({2, 0})))), 1 / std::numbers::sqrt2, 1e-12);
    EXPECT_NEAR(std::abs(out(static_cast<Eigen::Index>(sp.index({0, 2})))), 1 / std::numbers::sqrt2, 1e-12);
    const Vector vac = u * vacuum(sp).amplitudes;
    EXPECT_NEAR(std::abs(vac(0) - 1.0), 0.0, 1e-12);
    EXPECT_THROW(beamsplitter(sp, 1, 1), FockError);
    EXPECT_THROW(beamsplitter(FockSpace({3, 2}), 0, 1), FockError);
}

TEST(Beamsplitter, MixesSinglePhotonWithImaginaryArm) {
    const FockSpace sp({2, 2});
    const Vector out = beamsplitter(sp, 0, 1) * number_state(sp, {1, 0}).amplitudes;
    EXPECT_NEAR(std::abs(out(static_cast<Eigen::Index>(sp.index({1, 0}))) - 1 / std::numbers::sqrt2), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(out(static_cast<Eigen::Index>(sp.index({0, 1}))) - cplx(0, 1 / std::numbers::sqrt2)), 0.0, 1e-12);
}

TEST(OmegaNl, CoherentReturnWithPhase) {
    const FockSpace sp({3});
    const auto flip = omega_nl(sp, 0, ConstraintParams::coherent(0.0)).apply(superposition(sp, 0, 2));
    EXPECT_NEAR(std::abs(flip.matrix(2, 0) - (-0.5)), 0.0, 1e-12);
    const auto kick = omega_nl(sp, 0, ConstraintParams::coherent(1.5 * pi)).apply(superposition(sp, 0, 2));
    EXPECT_NEAR(std::abs(kick.matrix(2, 0) - cplx(0, 0.5)), 0.0, 1e-12);
    EXPECT_NEAR(kick.matrix(2, 2).real(), 0.5, 1e-12);
}

TEST(OmegaNl, SaturatedLossIsConversion) {
    const FockSpace sp({3});
    ConstraintParams p = ConstraintParams::coherent(0.4);
    p.pump_loss = std::numeric_limits<double>::infinity();
    EXPECT_EQ(p.coherence(), Coherence::incoherent);
    const auto a = omega_nl(sp, 0, p).matrix;
    EXPECT_LT((a - omega_sfg(sp, 0, kConversionAngle).matrix).norm(), 1e-12);
}

TEST(OmegaNl, FiniteLossInterpolates) {
    const FockSpace sp({3});
    ConstraintParams p = ConstraintParams::coherent(0.0);
    p.pump_loss = 1.0;
    EXPECT_EQ(p.coherence(), Coherence::partial);
    const auto out = omega_nl(sp, 0, p).apply(density_number_state(sp, {2}));
    EXPECT_NEAR(out.matrix(2, 2).real(), std::exp(-1.0), 1e-12);
    EXPECT_NEAR(out.matrix(0, 0).real(), 1 - std::exp(-1.0), 1e-12);
}

TEST(OmegaConstraint, IncoherentEndpointRemovesDoubleOccupation) {
    const FockSpace sp({3, 3});
    const auto s = omega_constraint(sp, 0, 1, ConstraintParams::incoherent());
    const auto out = s.apply(density_number_state(sp, {1, 1}));
    EXPECT_NEAR(population(out, {0, 0}), 1.0, 1e-8);
    for (std::vector<std::size_t> occ : {std::vector<std::size_t>{0, 0}, {0, 1}, {1, 0}}) {
        const auto in = density_number_state(sp, occ);
        EXPECT_LT((s.apply(in).matrix - in.matrix).norm(), 1e-12);
    }
}

TEST(OmegaConstraint, CoherentEndpointIsControlledPhase) {
    const FockSpace sp({3, 3});
    const Matrix block = qubit_block(omega_constraint(sp, 0, 1, ConstraintParams::coherent(1.5 * pi)));
    Eigen::VectorXcd d(4);
    d << 1, 1, 1, std::exp(I_unit * (pi / 2));
    EXPECT_LT((block - diag_superop(d)).cwiseAbs().maxCoeff(), 1e-9);

    const Matrix minus = qubit_block(omega_constraint(sp, 0, 1, ConstraintParams::coherent(0.0)));
    d << 1, 1, 1, -1;
    EXPECT_LT((minus - diag_superop(d)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(OmegaConstraint, RotatedTpaIsPairDissipatorAtDoubleRate) {
    const FockSpace sp({3, 3});
    const Matrix u = beamsplitter(sp, 0, 1);
    for (double gt : {0.05, 0.3, 1.0}) {
        const auto rotated = unitary_superop(sp, u, "BS")
                                 .then(omega_tpa(sp, 1, gt))
                                 .then(omega_tpa(sp, 0, gt))
                                 .then(unitary_superop(sp, u.adjoint(), "BS^dag"));
        const SparseMatrix pair = (*annihilation(sp, 0)) * (*annihilation(sp, 1));
        const auto direct = expm_dense(dissipator_generator(sp, pair, {0, 1}, "D[a_j a_k]"), 2 * gt);
        EXPECT_LT((qubit_block(rotated) - qubit_block(direct)).cwiseAbs().maxCoeff(), 1e-12) << gt;
    }
}

TEST(PhiQBound, Values) {
    EXPECT_NEAR(phi_q_conservative_bound(1), 2 * pi, 1e-15);
    EXPECT_NEAR(phi_q_conservative_bound(2), 1.5 * pi, 1e-15);
    EXPECT_NEAR(phi_q_conservative_bound(1e12), pi, 1e-9);
    EXPECT_THROW(phi_q_conservative_bound(0), NumericalError);
}

TEST(ConstraintParams, Classification) {
    EXPECT_EQ(ConstraintParams::coherent(0.3).coherence(), Coherence::coherent);
    EXPECT_EQ(ConstraintParams::incoherent().coherence(), Coherence::incoherent);
    EXPECT_EQ((ConstraintParams{0.0, 0.9, 0.0}).coherence(), Coherence::partial);
}
