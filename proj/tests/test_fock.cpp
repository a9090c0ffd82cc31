#include "zenoanneal/generators.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace zeno;

namespace {

DensityState random_density(const FockSpace& space, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> nd;
    const auto n = static_cast<Eigen::Index>(space.total_dim());
    Matrix a(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c) a(r, c) = cplx(nd(rng), nd(rng));
    Matrix rho = a * a.adjoint();
    rho /= rho.trace();
    return {space, rho};
}

Matrix random_matrix(Eigen::Index n, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> nd;
    Matrix a(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
        for (Eigen::Index c = 0; c < n; ++c) a(r, c) = cplx(nd(rng), nd(rng));
    return a;
}

}  // namespace

TEST(FockSpace, TotalDimensionIsProductOfModes) {
    EXPECT_EQ(make_space({3, 3}).total_dim(), 9u);
    EXPECT_EQ(make_space({2}).total_dim(), 2u);
    EXPECT_EQ(make_space({31}).total_dim(), 31u);
    EXPECT_EQ(make_space({2, 3, 4}).total_dim(), 24u);
}

TEST(FockSpace, RejectsDegenerateModes) {
    EXPECT_THROW(make_space({}), FockError);
    EXPECT_THROW(make_space({3, 1}), FockError);
}

TEST(FockSpace, RowMajorIndexing) {
    EXPECT_EQ(basis_index(make_space({2, 2}), {0, 0}), 0u);
    EXPECT_EQ(basis_index(make_space({2, 2}), {1, 0}), 2u);
    EXPECT_EQ(basis_index(make_space({3, 2}), {2, 1}), 5u);
    EXPECT_THROW(basis_index(make_space({2, 2}), {2, 0}), FockError);
    EXPECT_THROW(basis_index(make_space({2, 2}), {1}), FockError);
}

TEST(FockSpace, IndexOccupationRoundTrip) {
    const FockSpace s({3, 2, 4});
    for (std::size_t i = 0; i < s.total_dim(); ++i) {
        EXPECT_EQ(s.index(s.occupations(i)), i);
        for (std::size_t m = 0; m < 3; ++m) EXPECT_EQ(s.occupation(i, m), s.occupations(i)[m]);
    }
}

TEST(States, VacuumAndNumberStates) {
    const auto v = vacuum(make_space({2, 2}));
    EXPECT_EQ(v.amplitudes(0), cplx(1.0));
    EXPECT_NEAR(v.amplitudes.norm(), 1.0, 1e-15);
    const auto two = number_state(make_space({3}), {2});
    EXPECT_EQ(two.amplitudes(2), cplx(1.0));
    const auto hom_in = number_state(make_space({3, 3}), {1, 1});
    EXPECT_EQ(hom_in.amplitudes(4), cplx(1.0));
    EXPECT_TRUE(check_state(hom_in).ok);
}

TEST(States, CheckRejectsInvalidDensity) {
    const FockSpace s({2});
    DensityState bad{s, Matrix::Identity(2, 2)};
    EXPECT_FALSE(check_state(bad).ok);
    DensityState neg{s, Matrix::Zero(2, 2)};
    neg.matrix(0, 0) = 1.5;
    neg.matrix(1, 1) = -0.5;
    EXPECT_FALSE(check_state(neg).ok);
    EXPECT_TRUE(check_state(random_density(make_space({2, 3}), 4)).ok);
}

TEST(Vectorize, ColumnStackingRoundTrip) {
    const DensityState half{make_space({2}), Matrix::Identity(2, 2) / 2.0};
    const Vector v = vectorize(half);
    ASSERT_EQ(v.size(), 4);
    EXPECT_EQ(v(0), cplx(0.5));
    EXPECT_EQ(v(1), cplx(0.0));
    EXPECT_EQ(v(2), cplx(0.0));
    EXPECT_EQ(v(3), cplx(0.5));

    const auto rho = random_density(make_space({3, 2}), 7);
    EXPECT_EQ((devectorize(vectorize(rho), rho.space).matrix - rho.matrix).norm(), 0.0);

    const auto vr = vectorize(rho);
    const Eigen::Index d = 6;
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) EXPECT_NEAR(std::abs(vr(i + j * d) - std::conj(vr(j + i * d))), 0.0, 1e-15);
}

TEST(PartialTrace, PumpTraceAndSchmidtForm) {
    const FockSpace sp({3, 2});
    const auto r = partial_trace(density_number_state(sp, {0, 1}), {0});
    EXPECT_NEAR(r.matrix(0, 0).real(), 1.0, 1e-15);
    EXPECT_NEAR(r.matrix.norm(), 1.0, 1e-15);

    const FockSpace two({3, 3});
    PureState psi{two, Vector::Zero(9)};
    psi.amplitudes(static_cast<Eigen::Index>(two.index({2, 0}))) = 1 / std::sqrt(2.0);
    psi.amplitudes(static_cast<Eigen::Index>(two.index({0, 2}))) = 1 / std::sqrt(2.0);
    const auto red = partial_trace(to_density(psi), {0});
    Matrix expected = Matrix::Zero(3, 3);
    expected(0, 0) = expected(2, 2) = 0.5;
    EXPECT_LT((red.matrix - expected).norm(), 1e-15);
}

TEST(PartialTrace, PreservesTraceAndReordersKeptModes) {
    const auto rho = random_density(make_space({2, 3, 2}), 11);
    for (const std::set<std::size_t>& keep : {std::set<std::size_t>{0}, {1}, {2}, {0, 2}, {1, 2}}) {
        const auto r = partial_trace(rho, keep);
        EXPECT_NEAR(std::abs(r.matrix.trace() - 1.0), 0.0, 1e-12);
        EXPECT_TRUE(check_state(r).ok);
    }
    EXPECT_LT((partial_trace(rho, {0, 1, 2}).matrix - rho.matrix).norm(), 1e-15);
}

TEST(ApplyLocal, IdentityAndPhase) {
    const FockSpace sp({3, 2});
    const auto rho = random_density(sp, 3);
    EXPECT_LT((apply_local(Matrix::Identity(3, 3), rho, {0}).matrix - rho.matrix).norm(), 1e-14);

    const double phi = 0.37;
    Matrix phase = Matrix::Identity(3, 3);
    for (Eigen::Index k = 0; k < 3; ++k) phase(k, k) = std::exp(-I_unit * phi * static_cast<double>(k));
    const auto out = apply_local(phase, number_state(sp, {1, 0}), {0});
    EXPECT_NEAR(std::abs(out.amplitudes(static_cast<Eigen::Index>(sp.index({1, 0}))) - std::exp(-I_unit * phi)), 0.0, 1e-15);
}

TEST(ApplyLocal, MatchesGlobalEmbedding) {
    const FockSpace sp({2, 3, 2});
    const auto rho = random_density(sp, 5);
    const std::vector<std::vector<std::size_t>> target_sets{{0}, {1}, {2}, {0, 2}, {2, 0}, {1, 2}};
    unsigned seed = 100;
    for (const auto& targets : target_sets) {
        const FockSpace local = sp.subspace(targets);
        const auto d = static_cast<Eigen::Index>(local.total_dim());
        const Matrix op = random_matrix(d, seed++);
        const Matrix global = embed_operator(op, sp, targets);
        const Matrix expect = global * rho.matrix * global.adjoint();
        EXPECT_LT((apply_local_operator(op, rho, targets).matrix - expect).norm(), 1e-12);

        const Matrix sup = random_matrix(d * d, seed++);
        const Matrix expect_sup = devectorize(embed_superop(sup, sp, targets) * vectorize(rho), sp).matrix;
        EXPECT_LT((apply_local_superop(sup, rho, targets).matrix - expect_sup).norm(), 1e-12);
    }
}

TEST(Entropy, PureMixedAndMaximallyMixed) {
    EXPECT_NEAR(von_neumann_entropy(to_density(number_state(make_space({3}), {1}))), 0.0, 1e-12);
    EXPECT_NEAR(von_neumann_entropy({make_space({2}), Matrix::Identity(2, 2) / 2.0}), 1.0, 1e-12);
    for (std::size_t n = 1; n <= 4; ++n) {
        const FockSpace q(std::vector<std::size_t>(n, 2));
        const auto d = static_cast<Eigen::Index>(q.total_dim());
        EXPECT_NEAR(von_neumann_entropy({q, Matrix::Identity(d, d) / static_cast<double>(d)}), static_cast<double>(n), 1e-10);
    }
}

TEST(Population, BasicIdentities) {
    const FockSpace sp({3});
    EXPECT_NEAR(population(to_density(vacuum(sp)), {0}), 1.0, 1e-15);
    EXPECT_NEAR(population(number_state(sp, {1}), {0}), 0.0, 1e-15);
    const auto rho = random_density(make_space({2, 3}), 9);
    double sum = 0;
    for (std::size_t i = 0; i < 6; ++i) sum += population(rho, rho.space.occupations(i));
    EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(Generators, TpaActionOnNumberStates) {
    const FockSpace sp({3});
    const auto g = lindblad_tpa(sp, 0);
    EXPECT_LT(apply_generator(g, density_number_state(sp, {0})).norm(), 1e-15);
    EXPECT_LT(apply_generator(g, density_number_state(sp, {1})).norm(), 1e-15);
    Matrix expect = Matrix::Zero(3, 3);
    expect(0, 0) = 2;
    expect(2, 2) = -2;
    EXPECT_LT((apply_generator(g, density_number_state(sp, {2})) - expect).norm(), 1e-14);
}

TEST(Generators, LossActionAndCoherenceRate) {
    const FockSpace sp({2});
    const auto g = lindblad_loss(sp, 0);
    Matrix expect = Matrix::Zero(2, 2);
    expect(0, 0) = 1;
    expect(1, 1) = -1;
    EXPECT_LT((apply_generator(g, density_number_state(sp, {1})) - expect).norm(), 1e-15);
    EXPECT_LT(apply_generator(g, density_number_state(sp, {0})).norm(), 1e-15);
    DensityState coh{sp, Matrix::Zero(2, 2)};
    coh.matrix(0, 1) = 1.0;
    EXPECT_NEAR(std::abs(apply_generator(g, coh)(0, 1) + 0.5), 0.0, 1e-15);
}

TEST(Generators, TracePreservingAndHermiticityPreserving) {
    const FockSpace sp({3, 2});
    const auto rho = random_density(sp, 21);
    const std::vector<GeneratorSpec> gens{lindblad_tpa(sp, 0), lindblad_loss(sp, 1), gen_displacement(sp, 0),
                                          gen_sfg(sp, 0, 1), gen_phase(sp, 1)};
    for (const auto& g : gens) {
        const Matrix d = apply_generator(g, rho);
        EXPECT_LT(std::abs(d.trace()), 1e-10) << g.describe();
        EXPECT_LT((d - d.adjoint()).cwiseAbs().maxCoeff(), 1e-10) << g.describe();
    }
}

TEST(Generators, DisplacementOnQubitIsPauliXCommutator) {
    const FockSpace sp({2});
    Matrix x(2, 2);
    x << 0, 1, 1, 0;
    const auto rho = random_density(sp, 2);
    const Matrix expect = -I_unit * (x * rho.matrix - rho.matrix * x);
    EXPECT_LT((apply_generator(gen_displacement(sp, 0), rho) - expect).norm(), 1e-14);
}

TEST(Generators, SfgVacuumAndParity) {
    const FockSpace sp({5, 3});
    const auto g = gen_sfg(sp, 0, 1);
    EXPECT_LT(apply_generator(g, to_density(vacuum(sp))).norm(), 1e-15);
    const auto rho = apply_generator(g, density_number_state(sp, {4, 0}));
    for (Eigen::Index r = 0; r < rho.rows(); ++r)
        for (Eigen::Index c = 0; c < rho.cols(); ++c) {
            if (std::abs(rho(r, c)) < 1e-15) continue;
            const auto a = sp.occupations(static_cast<std::size_t>(r));
            const auto b = sp.occupations(static_cast<std::size_t>(c));
            EXPECT_EQ(a[0] + 2 * a[1], 4u);
            EXPECT_EQ(b[0] + 2 * b[1], 4u);
        }
}

TEST(Generators, SfgRejectsBadModes) {
    EXPECT_THROW(gen_sfg(make_space({3, 2}), 0, 0), FockError);
    EXPECT_THROW(gen_sfg(make_space({5, 2}), 0, 1), FockError);
    EXPECT_EQ(default_pump_dim(3), 2u);
    EXPECT_EQ(default_pump_dim(11), 6u);
}

TEST(Generators, CombineScalesAndPrunes) {
    const FockSpace sp({3});
    const auto g = lindblad_tpa(sp, 0);
    const auto one = combine({{g, 1.0}});
    EXPECT_EQ(SparseMatrix(one.matrix - g.matrix).norm(), 0.0);
    EXPECT_EQ(combine({{g, 0.0}}).matrix.nonZeros(), 0);
    const auto drive = combine({{gen_displacement(sp, 0), 1.0}, {g, 150.0}});
    EXPECT_TRUE(drive.dissipative());
    EXPECT_FALSE(gen_displacement(sp, 0).dissipative());
}
