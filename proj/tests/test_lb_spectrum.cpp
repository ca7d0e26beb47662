#include <weylab/lb_spectrum.hpp>

#include <gtest/gtest.h>

#include <numbers>

using namespace weylab;

namespace {

/// Degree n(n+1) with multiplicity 2n+1, enumerated independently.
std::vector<double> sphere_oracle(int max_degree)
{
    std::vector<double> out;
    for (int n = 0; n <= max_degree; ++n) {
        for (int k = 0; k < 2 * n + 1; ++k) out.push_back(n * (n + 1.0));
    }
    return out;
}

const SpectralBasis& level3_basis()
{
    static const SpectralBasis basis = solve_lowest(make_icosphere(3), 200);
    return basis;
}

} // namespace

TEST(ExactSphere, SmallDegrees)
{
    EXPECT_EQ(exact_sphere_spectrum(0).eigenvalues, std::vector<double>{0.0});
    EXPECT_EQ(exact_sphere_spectrum(1).eigenvalues, (std::vector<double>{0, 2, 2, 2}));
    const auto b2 = exact_sphere_spectrum(2);
    ASSERT_EQ(b2.mode_count(), 9u);
    for (std::size_t i = 4; i < 9; ++i) EXPECT_EQ(b2.eigenvalues[i], 6.0);
}

TEST(ExactSphere, MatchesEnumerationAndLabels)
{
    const auto b = exact_sphere_spectrum(12);
    EXPECT_EQ(b.eigenvalues, sphere_oracle(12));
    EXPECT_EQ(b.mode_count(), 169u);
    EXPECT_DOUBLE_EQ(b.top_eigenvalue(), 156.0);
    EXPECT_DOUBLE_EQ(b.horizon, 156.0);
    for (std::size_t i = 0; i < b.mode_count(); ++i) {
        EXPECT_EQ(b.degrees[i] * (b.degrees[i] + 1.0), b.eigenvalues[i]);
        EXPECT_LE(std::abs(b.orders[i]), b.degrees[i]);
    }
}

TEST(ExactSphere, DegreeReaching)
{
    EXPECT_EQ(sphere_degree_reaching(0.0), 0);
    EXPECT_EQ(sphere_degree_reaching(6.0), 2);
    EXPECT_EQ(sphere_degree_reaching(6.5), 3);
    EXPECT_EQ(sphere_degree_reaching(110.0), 10);
}

TEST(Fem, StiffnessAnnihilatesConstantsAndMassTraceIsArea)
{
    const auto mesh = make_icosphere(2);
    const auto p = assemble_fem(mesh);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(mesh.vertex_count()));
    EXPECT_LT((p.stiffness * ones).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(p.lumped_mass.sum(), mesh.area(), 1e-12);
    EXPECT_GT(p.lumped_mass.minCoeff(), 0.0);
    EXPECT_NEAR(ones.dot(p.mass * ones), mesh.area(), 1e-12);
    const Eigen::SparseMatrix<double> asym = p.stiffness - Eigen::SparseMatrix<double>(p.stiffness.transpose());
    EXPECT_LT(asym.norm(), 1e-12);
}

TEST(Fem, StiffnessIsPositiveSemidefinite)
{
    const auto p = assemble_fem(make_icosphere(1));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(p.stiffness));
    EXPECT_GT(es.eigenvalues().minCoeff(), -1e-10);
}

TEST(Fem, DegenerateTriangleRejected)
{
    // Tetrahedron whose bottom face is split at the midpoint of edge 0-1,
    // closed by a zero-area sliver along that edge.
    const SurfaceMesh m({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1), Vec3(0.5, 0, 0)},
        {Triangle{0, 2, 4}, Triangle{4, 2, 1}, Triangle{0, 1, 3}, Triangle{0, 3, 2}, Triangle{1, 2, 3},
            Triangle{0, 4, 1}});
    EXPECT_THROW(assemble_fem(m), MeshQualityError);
}

TEST(Solver, Level3LowestFour)
{
    const auto& b = level3_basis();
    EXPECT_LT(std::abs(b.eigenvalues[0]), 1e-8);
    for (int i = 1; i <= 3; ++i) EXPECT_NEAR(b.eigenvalues[i], 2.0, 0.02 * 2.0);
    EXPECT_EQ(b.source, SpectrumSource::mesh_fem);
}

TEST(Solver, ResidualsAndOrthonormality)
{
    const auto mesh = make_icosphere(3);
    const auto pencil = assemble_fem(mesh);
    const auto& b = level3_basis();
    for (std::size_t j = 0; j < b.mode_count(); ++j) {
        EXPECT_LE(b.residuals[j], b.tolerance * (1.0 + b.eigenvalues[j]));
        if (j > 0) EXPECT_GE(b.eigenvalues[j], b.eigenvalues[j - 1]);
    }
    const Eigen::MatrixXd gram = b.eigenvectors.transpose() * (pencil.mass * b.eigenvectors);
    EXPECT_LT((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Solver, ClusterMeansOverApproximateExactValues)
{
    // Level 3 is coarse; the blended mass keeps degree-cluster means above the exact values.
    const auto& b = level3_basis();
    const auto oracle = sphere_oracle(6);
    std::size_t start = 1;
    for (int n = 1; n <= 6; ++n) {
        const std::size_t size = 2 * n + 1;
        double mean = 0;
        for (std::size_t i = start; i < start + size; ++i) mean += b.eigenvalues[i] / size;
        EXPECT_GE(mean, oracle[start] * (1 - 1e-3)) << "degree " << n;
        EXPECT_NEAR(mean, oracle[start], 0.03 * oracle[start]) << "degree " << n;
        start += size;
    }
}

TEST(Solver, KrylovPathMatchesDense)
{
    // Level 4 exceeds the dense cutoff and runs the Krylov path.
    const auto mesh = make_icosphere(4);
    const auto b = solve_lowest(mesh, 25);
    ASSERT_EQ(b.mode_count(), 25u);
    EXPECT_LT(std::abs(b.eigenvalues[0]), 1e-8);
    const auto oracle = sphere_oracle(4);
    for (std::size_t i = 1; i < 25; ++i) EXPECT_NEAR(b.eigenvalues[i], oracle[i], 0.01 * oracle[i]);
    for (std::size_t j = 0; j < 25; ++j) EXPECT_LE(b.residuals[j], b.tolerance * (1.0 + b.eigenvalues[j]));
}

TEST(Solver, CountOneAndPreconditions)
{
    const auto mesh = make_icosphere(1);
    const auto b = solve_lowest(mesh, 1);
    ASSERT_EQ(b.mode_count(), 1u);
    EXPECT_LT(std::abs(b.eigenvalues[0]), 1e-8);
    EXPECT_THROW(solve_lowest(mesh, 0), PreconditionError);
    EXPECT_THROW(solve_lowest(mesh, mesh.vertex_count() + 1), PreconditionError);
    SolverOptions loose;
    loose.tolerance = 1e-3;
    EXPECT_THROW(solve_lowest(mesh, 4, loose), PreconditionError);
    loose.tolerance = 0.0;
    EXPECT_THROW(solve_lowest(mesh, 4, loose), PreconditionError);
}

TEST(Solver, Deterministic)
{
    const auto mesh = make_icosphere(4);
    const auto a = solve_lowest(mesh, 12);
    const auto b = solve_lowest(mesh, 12);
    EXPECT_EQ(a.eigenvalues, b.eigenvalues);
    EXPECT_EQ((a.eigenvectors - b.eigenvectors).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Solver, LaplacianWeylLawSanity)
{
    // #{lambda_j <= L} / L -> area / (4 pi) at half the resolved range.
    const auto& b = level3_basis();
    const double half = 0.5 * b.top_eigenvalue();
    const auto below = std::count_if(b.eigenvalues.begin(), b.eigenvalues.end(), [&](double l) { return l <= half; });
    EXPECT_NEAR(static_cast<double>(below) / half, 1.0, 0.1);
    const auto exact = exact_sphere_spectrum(40);
    const double l = 0.5 * exact.top_eigenvalue();
    const auto n = std::count_if(exact.eigenvalues.begin(), exact.eigenvalues.end(), [&](double v) { return v <= l; });
    EXPECT_NEAR(static_cast<double>(n) / l, 1.0, 0.1);
}
