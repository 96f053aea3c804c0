#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "ddec/meshfun.hpp"

using namespace ddec;

namespace {
std::mt19937 rng(777);
double urand(double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng);
}
}  // namespace

TEST_CASE("wrap basics") {
  CHECK(wrap(1.25) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(wrap(-0.25) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(wrap(1.0) == 0.0);
  for (int i = 0; i < 50; ++i) {
    double s = urand(-10, 10);
    CHECK(wrap(s) >= 0.0);
    CHECK(wrap(s) < 1.0);
    CHECK(wrap(s + 1.0) == doctest::Approx(wrap(s)).epsilon(1e-12));
  }
}

TEST_CASE("gauss-legendre integrates high-degree polynomials") {
  Vec nodes, weights;
  gauss_legendre(4, nodes, weights);
  CHECK(weights.sum() == doctest::Approx(1.0).epsilon(1e-14));
  // degree 7 exact with 4 points
  double q = 0.0;
  for (int i = 0; i < 4; ++i) q += weights(i) * std::pow(nodes(i), 7);
  CHECK(q == doctest::Approx(1.0 / 8.0).epsilon(1e-14));
}

TEST_CASE("interpolation at representation nodes selects stored values") {
  CollocationMesh mesh = CollocationMesh::uniform(5, 4);
  for (int node = 0; node < mesh.num_nodes(); ++node) {
    Mat E = interp_matrix(mesh, 2, mesh.rep_nodes(node), 0);
    for (int c = 0; c < 2; ++c) {
      Vec row = E.row(c);
      CHECK(row(node * 2 + c) == doctest::Approx(1.0).epsilon(1e-12));
      row(node * 2 + c) = 0.0;
      CHECK(row.lpNorm<Eigen::Infinity>() < 1e-10);
    }
  }
}

TEST_CASE("interpolation exact for s^kappa on one subinterval") {
  CollocationMesh mesh = CollocationMesh::uniform(1, 4);
  MeshFunction x = sample(mesh, 1, [](double s) {
    Vec v(1);
    v(0) = std::pow(s, 4);
    return v;
  });
  for (int i = 0; i < 30; ++i) {
    double s = urand(0, 1);
    CHECK(x.eval(s)(0) == doctest::Approx(std::pow(s, 4)).epsilon(1e-13));
    CHECK(x.eval(s, 1)(0) ==
          doctest::Approx(4.0 * std::pow(s, 3)).epsilon(1e-11));
  }
}

TEST_CASE("derivative of a constant profile is zero") {
  CollocationMesh mesh = CollocationMesh::uniform(7, 3);
  MeshFunction x = sample(mesh, 2, [](double) { return Vec::Constant(2, 3.5); });
  for (int i = 0; i < 10; ++i)
    CHECK(x.eval(urand(0, 1), 1).norm() < 1e-10);
}

TEST_CASE("interpolation reproduces random degree-kappa piecewise polynomials") {
  CollocationMesh mesh = CollocationMesh::uniform(6, 4);
  // a global polynomial of degree kappa lies in the ansatz space
  Vec c(5);
  for (int i = 0; i < 5; ++i) c(i) = urand(-1, 1);
  auto poly = [&](double s, int order) {
    double v = 0.0;
    for (int i = order; i < 5; ++i) {
      double term = c(i) * std::pow(s, i - order);
      for (int k = 0; k < order; ++k) term *= (i - k);
      v += term;
    }
    return v;
  };
  MeshFunction x = sample(mesh, 1, [&](double s) {
    Vec v(1);
    v(0) = poly(s, 0);
    return v;
  });
  for (int i = 0; i < 40; ++i) {
    double s = urand(0, 1);
    CHECK(x.eval(s)(0) == doctest::Approx(poly(s, 0)).epsilon(1e-11));
    CHECK(x.eval(s, 1)(0) == doctest::Approx(poly(s, 1)).epsilon(1e-9));
  }
}

TEST_CASE("phase inner product oracle values") {
  CollocationMesh mesh = CollocationMesh::uniform(40, 4);
  MeshFunction cst = sample(mesh, 2, [](double) { return Vec::Ones(2); });
  MeshFunction any = sample(mesh, 2, [](double s) {
    Vec v(2);
    v << s * s, std::cos(s);
    return v;
  });
  CHECK(std::abs(phase_inner_product(cst, any)) < 1e-13);

  MeshFunction sine = sample(mesh, 1, [](double s) {
    Vec v(1);
    v(0) = std::sin(2 * M_PI * s);
    return v;
  });
  CHECK(std::abs(phase_inner_product(sine, sine)) < 1e-6);

  MeshFunction lin = sample(mesh, 2, [](double s) { return Vec::Constant(2, s); });
  MeshFunction one = sample(mesh, 2, [](double) { return Vec::Ones(2); });
  CHECK(phase_inner_product(lin, one) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("phase inner product matches dense quadrature and is bilinear") {
  CollocationMesh mesh = CollocationMesh::uniform(10, 4);
  MeshFunction a = sample(mesh, 1, [](double s) {
    Vec v(1);
    v(0) = std::sin(3 * s) + 0.2 * s;
    return v;
  });
  MeshFunction b = sample(mesh, 1, [](double s) {
    Vec v(1);
    v(0) = std::exp(-s) * std::cos(5 * s);
    return v;
  });
  // dense trapezoid reference on the piecewise polynomials themselves
  double ref = 0.0;
  int NQ = 20000;
  for (int i = 0; i < NQ; ++i) {
    double s0 = double(i) / NQ, s1 = double(i + 1) / NQ;
    double f0 = a.eval(s0, 1)(0) * b.eval(s0)(0);
    double f1 = a.eval(std::min(s1, 1.0), 1)(0) * b.eval(std::min(s1, 1.0))(0);
    ref += 0.5 * (f0 + f1) / NQ;
  }
  CHECK(phase_inner_product(a, b) == doctest::Approx(ref).epsilon(1e-7));

  MeshFunction b2 = b;
  b2.coeffs *= 2.5;
  CHECK(phase_inner_product(a, b2) ==
        doctest::Approx(2.5 * phase_inner_product(a, b)).epsilon(1e-12));
}

TEST_CASE("mass inner product and component integral") {
  CollocationMesh mesh = CollocationMesh::uniform(12, 4);
  MeshFunction s2 = sample(mesh, 1, [](double s) {
    Vec v(1);
    v(0) = s;
    return v;
  });
  CHECK(mass_inner_product(s2, s2) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(integral_component(s2, 0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("adapt_mesh on a constant profile returns the uniform mesh") {
  CollocationMesh mesh = CollocationMesh::uniform(8, 4);
  // start from a deliberately skewed mesh
  Vec b(9);
  for (int i = 0; i <= 8; ++i) b(i) = std::pow(double(i) / 8.0, 2.0);
  CollocationMesh skew = CollocationMesh::from_boundaries(b, 4);
  MeshFunction c = sample(skew, 1, [](double) { return Vec::Ones(1); });
  CollocationMesh ad = adapt_mesh(c);
  for (int i = 0; i <= 8; ++i)
    CHECK(ad.boundaries(i) == doctest::Approx(double(i) / 8.0).epsilon(1e-9));
}

TEST_CASE("adapt_mesh concentrates points at a sharp layer") {
  CollocationMesh mesh = CollocationMesh::uniform(20, 4);
  MeshFunction layer = sample(mesh, 1, [](double s) {
    Vec v(1);
    v(0) = std::tanh((s - 0.5) / 0.02);
    return v;
  });
  CollocationMesh ad = adapt_mesh(layer);
  // smallest subinterval should sit at the layer
  int imin = 0;
  double wmin = 1e9;
  for (int i = 0; i < 20; ++i) {
    double w = ad.boundaries(i + 1) - ad.boundaries(i);
    if (w < wmin) {
      wmin = w;
      imin = i;
    }
  }
  double mid = 0.5 * (ad.boundaries(imin) + ad.boundaries(imin + 1));
  CHECK(std::abs(mid - 0.5) < 0.1);
  CHECK(wmin < 0.5 / 20.0);
}

TEST_CASE("re-adaptation of an equidistributed mesh is nearly a fixed point") {
  CollocationMesh mesh = CollocationMesh::uniform(16, 4);
  MeshFunction f = sample(mesh, 1, [](double s) {
    Vec v(1);
    v(0) = std::sin(2 * M_PI * s) + 0.3 * std::sin(6 * M_PI * s);
    return v;
  });
  // equidistribute to the fixed point first, then one more pass barely moves
  CollocationMesh m1 = adapt_mesh(f);
  MeshFunction g = transfer(f, m1);
  for (int it = 0; it < 3; ++it) {
    m1 = adapt_mesh(g);
    g = transfer(g, m1);
  }
  CollocationMesh m2 = adapt_mesh(g);
  double w = 1.0 / 16.0;
  for (int i = 0; i <= 16; ++i)
    CHECK(std::abs(m2.boundaries(i) - m1.boundaries(i)) < 0.01 * w);
}

TEST_CASE("transfer preserves values") {
  CollocationMesh src = CollocationMesh::uniform(10, 4);
  CollocationMesh dst = CollocationMesh::uniform(14, 4);
  MeshFunction f = sample(src, 2, [](double s) {
    Vec v(2);
    v << std::sin(2 * M_PI * s), std::cos(2 * M_PI * s);
    return v;
  });
  MeshFunction g = transfer(f, dst);
  for (int i = 0; i < 20; ++i) {
    double s = urand(0, 1);
    CHECK((f.eval(s) - g.eval(s)).norm() < 1e-5);
  }
}
