#include "ddec/pobif.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ddec {

// Quadrature row w with w^T coeffs = integral of x(s)^T (coeffs fn)(s) ds.
static Vec quad_row(const MeshFunction& x) {
  const CollocationMesh& mesh = x.mesh;
  const int n = x.n;
  Vec row = Vec::Zero(n * mesh.num_nodes());
  Vec gn, gw;
  gauss_legendre(mesh.degree + 1, gn, gw);
  for (int e = 0; e < mesh.NT; ++e) {
    double a = mesh.boundaries(e), h = mesh.boundaries(e + 1) - a;
    for (int q = 0; q <= mesh.degree; ++q) {
      double s = a + h * gn(q);
      Vec xv = x.eval(s);
      InterpStencil st = interp_stencil(mesh, s, 0);
      for (int i = 0; i <= mesh.degree; ++i)
        for (int c = 0; c < n; ++c)
          row((st.first_node + i) * n + c) += h * gw(q) * xv(c) * st.w(i);
    }
  }
  return row;
}

PeriodicOrbitVar PoBifSystem::base_orbit(const Vec& y) const {
  PeriodicOrbitVar po;
  po.profile = MeshFunction(x_ref->mesh, n);
  po.profile.coeffs = y.head(nc);
  po.T = y(iT);
  po.p = *p_base;
  po.p(pi) = y(ipi);
  po.p(pj) = y(ipj);
  return po;
}

// ---------------------------------------------------------------- fold of PO

PoBifSystem fold_po_system(const DdeSystem& sys, int pi, int pj,
                           const CollocationMesh& mesh) {
  PoBifSystem bs;
  bs.n = sys.n;
  bs.nc = sys.n * mesh.num_nodes();
  bs.iT = bs.nc;
  bs.ipi = bs.nc + 1;
  bs.ipj = bs.nc + 2;
  bs.iv = bs.nc + 3;
  bs.pi = pi;
  bs.pj = pj;
  bs.x_ref = std::make_shared<MeshFunction>(MeshFunction(mesh, sys.n));
  bs.p_base = std::make_shared<Vec>(sys.p);
  const int nc = bs.nc;

  bs.ds.dim_y = 2 * nc + 4;
  bs.ds.param_components = {bs.ipi, bs.ipj};
  bs.ds.param_labels = {sys.param_names[pi], sys.param_names[pj]};

  auto x_ref = bs.x_ref;
  auto p_base = bs.p_base;
  const int n = sys.n;
  auto unpack = [=](const Vec& y, MeshFunction& prof, double& T, Vec& p,
                    MeshFunction& vprof, double& Tv) {
    prof = MeshFunction(x_ref->mesh, n);
    prof.coeffs = y.head(nc);
    T = y(nc);
    p = *p_base;
    p(pi) = y(nc + 1);
    p(pj) = y(nc + 2);
    vprof = MeshFunction(x_ref->mesh, n);
    vprof.coeffs = y.segment(nc + 3, nc);
    Tv = y(2 * nc + 3);
  };

  bs.ds.residual = [&sys, x_ref, unpack, nc](const Vec& y) {
    MeshFunction prof, vprof;
    double T, Tv;
    Vec p;
    unpack(y, prof, T, p, vprof, Tv);
    Vec r(2 * nc + 3);
    r.head(nc + 1) = po_residual(sys, prof, T, p, *x_ref);
    PoJacobian J = po_jacobian(sys, prof, T, p, *x_ref);
    r.segment(nc + 1, nc + 1) = J.Jc * vprof.coeffs + J.JT * Tv;
    r(2 * nc + 2) = mass_inner_product(vprof, vprof) + Tv * Tv - 1.0;
    return r;
  };
  bs.ds.jacobian = [&sys, x_ref, unpack, nc, pi, pj](const Vec& y) {
    MeshFunction prof, vprof;
    double T, Tv;
    Vec p;
    unpack(y, prof, T, p, vprof, Tv);
    PoJacobian J = po_jacobian(sys, prof, T, p, *x_ref);
    const int rows = 2 * nc + 3;
    Mat JJ = Mat::Zero(rows, 2 * nc + 4);
    JJ.block(0, 0, nc + 1, nc) = J.Jc;
    JJ.block(0, nc, nc + 1, 1) = J.JT;
    JJ.block(0, nc + 1, nc + 1, 1) = J.Jp.col(pi);
    JJ.block(0, nc + 2, nc + 1, 1) = J.Jp.col(pj);

    // second derivative of the base residual contracted with (x_v, T_v),
    // via a symmetric difference of the Jacobian in that direction
    const double del = 1e-5;
    MeshFunction pp = prof, pm = prof;
    pp.coeffs += del * vprof.coeffs;
    pm.coeffs -= del * vprof.coeffs;
    PoJacobian Jp2 = po_jacobian(sys, pp, T + del * Tv, p, *x_ref);
    PoJacobian Jm2 = po_jacobian(sys, pm, T - del * Tv, p, *x_ref);
    JJ.block(nc + 1, 0, nc + 1, nc) = (Jp2.Jc - Jm2.Jc) / (2 * del);
    JJ.block(nc + 1, nc, nc + 1, 1) = (Jp2.JT - Jm2.JT) / (2 * del);
    JJ.block(nc + 1, nc + 1, nc + 1, 1) =
        (Jp2.Jp.col(pi) - Jm2.Jp.col(pi)) / (2 * del);
    JJ.block(nc + 1, nc + 2, nc + 1, 1) =
        (Jp2.Jp.col(pj) - Jm2.Jp.col(pj)) / (2 * del);
    JJ.block(nc + 1, nc + 3, nc + 1, nc) = J.Jc;
    JJ.block(nc + 1, 2 * nc + 3, nc + 1, 1) = J.JT;

    JJ.block(2 * nc + 2, nc + 3, 1, nc) =
        2.0 * quad_row(vprof).transpose();
    JJ(2 * nc + 2, 2 * nc + 3) = 2.0 * Tv;
    return JJ;
  };
  return bs;
}

Vec seed_fold_po(const PoBifSystem& bs, const PoBranchPoint& pt) {
  *bs.x_ref = pt.orbit.profile;
  *bs.p_base = pt.orbit.p;
  const int nc = bs.nc;
  MeshFunction vprof(pt.orbit.profile.mesh, bs.n);
  double Tv = 0.0;
  if (pt.tangent.size() >= nc + 1) {
    vprof.coeffs = pt.tangent.head(nc);
    Tv = pt.tangent(nc);
  } else {
    vprof.coeffs = Vec::Ones(nc);
  }
  double s = std::sqrt(mass_inner_product(vprof, vprof) + Tv * Tv);
  vprof.coeffs /= s;
  Tv /= s;
  Vec y(2 * nc + 4);
  y << pt.orbit.profile.coeffs, pt.orbit.T, pt.orbit.p(bs.pi),
      pt.orbit.p(bs.pj), vprof.coeffs, Tv;
  return y;
}

// ------------------------------------------------------- torus and doubling

namespace {

struct EigRowCtx {
  const DdeSystem* sys;
  TorusMode mode;
};

// Residual rows of the variational eigenproblem in the periodic frame.
// Torus: M x_v' + i pi w M x_v - sum_j A_j e^{-i pi w tau_j/T} x_v(wrap) = 0
// split into real and imaginary parts. PD: real antiperiodic u with sign
// factor (-1)^floor on wrapped delayed evaluations.
Vec eig_rows(const DdeSystem& sys, TorusMode mode, const PeriodicOrbitVar& po,
             const MeshFunction& vR, const MeshFunction& vI, double omega) {
  const CollocationMesh& mesh = po.profile.mesh;
  const int n = sys.n;
  const int ncol = mesh.degree * mesh.NT;
  const bool torus = (mode == TorusMode::Torus);
  const Complex I(0.0, 1.0);
  Vec r(torus ? 2 * ncol * n : ncol * n);
  for (int c = 0; c < ncol; ++c) {
    double s = mesh.colloc_nodes(c);
    OrbitLinearization lin = linearize_along_orbit(sys, po, s);
    if (torus) {
      // delta^j recursion in the rotating frame: the main delayed term
      // carries the phase e^{-i th_j}, the argument-shift term does not
      std::vector<CVec> del(sys.d + 1);
      del[0] = vR.eval(s).cast<Complex>() + I * vI.eval(s).cast<Complex>();
      for (int j = 0; j < sys.d; ++j) {
        double th = M_PI * omega * lin.taus(j) / po.T;
        CVec vw = vR.eval_wrapped(lin.args(j)).cast<Complex>() +
                  I * vI.eval_wrapped(lin.args(j)).cast<Complex>();
        Complex sh(0.0, 0.0);
        for (int l = 0; l <= j; ++l)
          sh += (lin.dtau_dx[j][l].cast<Complex>() * del[l]).value();
        del[j + 1] =
            std::exp(-I * th) * vw - (lin.xp[j] / po.T).cast<Complex>() * sh;
      }
      CVec res = sys.mass.cast<Complex>() *
                     (vR.eval(s, 1).cast<Complex>() +
                      I * vI.eval(s, 1).cast<Complex>()) +
                 I * M_PI * omega *
                     (sys.mass.cast<Complex>() * del[0]);
      for (int j = 0; j <= sys.d; ++j)
        res -= lin.A[j].cast<Complex>() * del[j];
      r.segment(2 * c * n, n) = res.real();
      r.segment((2 * c + 1) * n, n) = res.imag();
    } else {
      // antiperiodic u with sign factor (-1)^floor on wrapped evaluations
      std::vector<Vec> del(sys.d + 1);
      del[0] = vR.eval(s);
      for (int j = 0; j < sys.d; ++j) {
        double sg = (static_cast<long long>(std::floor(lin.args(j))) % 2 == 0)
                        ? 1.0
                        : -1.0;
        double sh = 0.0;
        for (int l = 0; l <= j; ++l)
          sh += (lin.dtau_dx[j][l] * del[l]).value();
        del[j + 1] =
            sg * vR.eval_wrapped(lin.args(j)) - (lin.xp[j] / po.T) * sh;
      }
      Vec re = sys.mass * vR.eval(s, 1);
      for (int j = 0; j <= sys.d; ++j) re -= lin.A[j] * del[j];
      r.segment(c * n, n) = re;
    }
  }
  return r;
}

// Analytic derivative of eig_rows in the eigenfunction block and omega.
void eig_rows_vjac(const DdeSystem& sys, TorusMode mode,
                   const PeriodicOrbitVar& po, const MeshFunction& vR,
                   const MeshFunction& vI, double omega, Mat& Jv, Vec& Jw) {
  const CollocationMesh& mesh = po.profile.mesh;
  const int n = sys.n, nc = n * mesh.num_nodes();
  const int ncol = mesh.degree * mesh.NT;
  const bool torus = (mode == TorusMode::Torus);
  const int rows = torus ? 2 * ncol * n : ncol * n;
  Jv = Mat::Zero(rows, torus ? 2 * nc : nc);
  Jw = Vec::Zero(rows);
  auto add = [&](int row, int colblk, double s, int order, const Mat& C) {
    InterpStencil st = interp_stencil(mesh, wrap(s), order);
    for (int i = 0; i <= mesh.degree; ++i)
      Jv.block(row, colblk + (st.first_node + i) * n, n, n) += st.w(i) * C;
  };
  for (int c = 0; c < ncol; ++c) {
    double s = mesh.colloc_nodes(c);
    OrbitLinearization lin = linearize_along_orbit(sys, po, s);
    if (torus) {
      int rr = 2 * c * n, ri = (2 * c + 1) * n;
      add(rr, 0, s, 1, sys.mass);
      add(rr, nc, s, 0, -M_PI * omega * sys.mass);
      add(ri, nc, s, 1, sys.mass);
      add(ri, 0, s, 0, M_PI * omega * sys.mass);
      add(rr, 0, s, 0, -lin.A[0]);
      add(ri, nc, s, 0, -lin.A[0]);
      Jw.segment(rr, n) = -M_PI * (sys.mass * vI.eval(s));
      Jw.segment(ri, n) = M_PI * (sys.mass * vR.eval(s));
      for (int j = 0; j < sys.d; ++j) {
        double th = M_PI * omega * lin.taus(j) / po.T;
        double dth = M_PI * lin.taus(j) / po.T;
        Vec vRw = vR.eval_wrapped(lin.args(j));
        Vec vIw = vI.eval_wrapped(lin.args(j));
        add(rr, 0, lin.args(j), 0, -std::cos(th) * lin.A[j + 1]);
        add(rr, nc, lin.args(j), 0, -std::sin(th) * lin.A[j + 1]);
        add(ri, 0, lin.args(j), 0, std::sin(th) * lin.A[j + 1]);
        add(ri, nc, lin.args(j), 0, -std::cos(th) * lin.A[j + 1]);
        Jw.segment(rr, n) -=
            lin.A[j + 1] * dth * (-std::sin(th) * vRw + std::cos(th) * vIw);
        Jw.segment(ri, n) -=
            lin.A[j + 1] * dth * (-std::sin(th) * vIw - std::cos(th) * vRw);
      }
    } else {
      int rr = c * n;
      add(rr, 0, s, 1, sys.mass);
      add(rr, 0, s, 0, -lin.A[0]);
      for (int j = 0; j < sys.d; ++j) {
        double sg = (static_cast<long long>(std::floor(lin.args(j))) % 2 == 0)
                        ? 1.0
                        : -1.0;
        add(rr, 0, lin.args(j), 0, -sg * lin.A[j + 1]);
      }
    }
  }
}

}  // namespace

PoBifSystem torus_pd_system(const DdeSystem& sys, int pi, int pj,
                            const CollocationMesh& mesh, TorusMode mode) {
  PoBifSystem bs;
  const bool torus = (mode == TorusMode::Torus);
  bs.n = sys.n;
  bs.nc = sys.n * mesh.num_nodes();
  bs.iT = bs.nc;
  bs.ipi = bs.nc + 1;
  bs.ipj = bs.nc + 2;
  bs.iv = bs.nc + 3;
  bs.iomega = torus ? 3 * bs.nc + 3 : -1;
  bs.pi = pi;
  bs.pj = pj;
  bs.x_ref = std::make_shared<MeshFunction>(MeshFunction(mesh, sys.n));
  bs.xv_ref_re = std::make_shared<MeshFunction>(MeshFunction(mesh, sys.n));
  bs.xv_ref_im = std::make_shared<MeshFunction>(MeshFunction(mesh, sys.n));
  bs.p_base = std::make_shared<Vec>(sys.p);
  const int nc = bs.nc, n = sys.n;

  bs.ds.dim_y = torus ? 3 * nc + 4 : 2 * nc + 3;
  bs.ds.param_components = {bs.ipi, bs.ipj};
  if (torus) bs.ds.param_components.push_back(bs.iomega);
  bs.ds.param_labels = {sys.param_names[pi], sys.param_names[pj]};

  auto x_ref = bs.x_ref;
  auto refR = bs.xv_ref_re;
  auto refI = bs.xv_ref_im;
  auto p_base = bs.p_base;
  auto unpack = [=](const Vec& y, PeriodicOrbitVar& po, MeshFunction& vR,
                    MeshFunction& vI, double& omega) {
    po.profile = MeshFunction(x_ref->mesh, n);
    po.profile.coeffs = y.head(nc);
    po.T = y(nc);
    po.p = *p_base;
    po.p(pi) = y(nc + 1);
    po.p(pj) = y(nc + 2);
    vR = MeshFunction(x_ref->mesh, n);
    vR.coeffs = y.segment(nc + 3, nc);
    vI = MeshFunction(x_ref->mesh, n);
    if (torus) {
      vI.coeffs = y.segment(2 * nc + 3, nc);
      omega = y(3 * nc + 3);
    } else {
      omega = 1.0;
    }
  };

  const int nn = mesh.num_nodes();
  bs.ds.residual = [&sys, x_ref, refR, refI, unpack, nc, n, nn, torus,
                    mode](const Vec& y) {
    PeriodicOrbitVar po;
    MeshFunction vR, vI;
    double omega;
    unpack(y, po, vR, vI, omega);
    Vec base = po_residual(sys, po.profile, po.T, po.p, *x_ref);
    Vec er = eig_rows(sys, mode, po, vR, vI, omega);
    const int rows = torus ? 3 * nc + 3 : 2 * nc + 2;
    Vec r(rows);
    r.head(nc + 1) = base;
    r.segment(nc + 1, er.size()) = er;
    int k = nc + 1 + static_cast<int>(er.size());
    // boundary rows: periodic for torus, antiperiodic for doubling
    double bsign = torus ? -1.0 : 1.0;
    r.segment(k, n) = vR.value_at_node(0) + bsign * vR.value_at_node(nn - 1);
    k += n;
    if (torus) {
      r.segment(k, n) = vI.value_at_node(0) - vI.value_at_node(nn - 1);
      k += n;
      r(k) = quad_row(*refR).dot(vR.coeffs) + quad_row(*refI).dot(vI.coeffs) -
             1.0;
      r(k + 1) =
          quad_row(*refR).dot(vI.coeffs) - quad_row(*refI).dot(vR.coeffs);
    } else {
      r(k) = quad_row(*refR).dot(vR.coeffs) - 1.0;
    }
    return r;
  };

  bs.ds.jacobian = [&sys, x_ref, refR, refI, unpack, nc, n, nn, torus, mode,
                    pi, pj](const Vec& y) {
    PeriodicOrbitVar po;
    MeshFunction vR, vI;
    double omega;
    unpack(y, po, vR, vI, omega);
    const int dim = torus ? 3 * nc + 4 : 2 * nc + 3;
    const int rows = torus ? 3 * nc + 3 : 2 * nc + 2;
    Mat J = Mat::Zero(rows, dim);

    PoJacobian Jpo = po_jacobian(sys, po.profile, po.T, po.p, *x_ref);
    J.block(0, 0, nc + 1, nc) = Jpo.Jc;
    J.block(0, nc, nc + 1, 1) = Jpo.JT;
    J.block(0, nc + 1, nc + 1, 1) = Jpo.Jp.col(pi);
    J.block(0, nc + 2, nc + 1, 1) = Jpo.Jp.col(pj);

    Mat Jv;
    Vec Jw;
    eig_rows_vjac(sys, mode, po, vR, vI, omega, Jv, Jw);
    const int er_rows = static_cast<int>(Jv.rows());
    J.block(nc + 1, nc + 3, er_rows, torus ? 2 * nc : nc) = Jv;
    if (torus) J.block(nc + 1, 3 * nc + 3, er_rows, 1) = Jw;

    // eigenproblem rows vs base orbit: central differences per component
    {
      PeriodicOrbitVar pp = po;
      auto diff_col = [&](int col, auto&& bump) {
        double h = 1e-6;
        bump(pp, h);
        Vec rp = eig_rows(sys, mode, pp, vR, vI, omega);
        bump(pp, -2 * h);
        Vec rm = eig_rows(sys, mode, pp, vR, vI, omega);
        bump(pp, h);
        J.block(nc + 1, col, er_rows, 1) = (rp - rm) / (2 * h);
      };
      for (int k = 0; k < nc; ++k)
        diff_col(k, [k](PeriodicOrbitVar& o, double h) { o.profile.coeffs(k) += h; });
      diff_col(nc, [](PeriodicOrbitVar& o, double h) { o.T += h; });
      diff_col(nc + 1, [pi](PeriodicOrbitVar& o, double h) { o.p(pi) += h; });
      diff_col(nc + 2, [pj](PeriodicOrbitVar& o, double h) { o.p(pj) += h; });
    }

    int k = nc + 1 + er_rows;
    double bsign = torus ? -1.0 : 1.0;
    for (int c = 0; c < n; ++c) {
      J(k + c, nc + 3 + c) = 1.0;
      J(k + c, nc + 3 + (nn - 1) * n + c) = bsign;
    }
    k += n;
    if (torus) {
      for (int c = 0; c < n; ++c) {
        J(k + c, 2 * nc + 3 + c) = 1.0;
        J(k + c, 2 * nc + 3 + (nn - 1) * n + c) = -1.0;
      }
      k += n;
      Vec qR = quad_row(*refR), qI = quad_row(*refI);
      J.block(k, nc + 3, 1, nc) = qR.transpose();
      J.block(k, 2 * nc + 3, 1, nc) = qI.transpose();
      J.block(k + 1, nc + 3, 1, nc) = -qI.transpose();
      J.block(k + 1, 2 * nc + 3, 1, nc) = qR.transpose();
    } else {
      J.block(k, nc + 3, 1, nc) = quad_row(*refR).transpose();
    }
    return J;
  };
  return bs;
}

Vec seed_torus_pd(const PoBifSystem& bs, const DdeSystem& sys,
                  const PoBranchPoint& pt, TorusMode mode) {
  const bool torus = (mode == TorusMode::Torus);
  *bs.x_ref = pt.orbit.profile;
  *bs.p_base = pt.orbit.p;
  FloquetSpectrum fs = floquet_multipliers(sys, pt.orbit, 12);
  int best = -1;
  double bestdist = 1e300;
  for (size_t i = 0; i < fs.multipliers.size(); ++i) {
    const Complex mu = fs.multipliers[i].mu;
    double dist;
    if (torus) {
      if (mu.imag() <= 1e-6) continue;
      dist = std::abs(std::abs(mu) - 1.0);
    } else {
      if (std::abs(mu.imag()) > 1e-4) continue;
      dist = std::abs(mu + 1.0);
    }
    if (dist < bestdist) {
      bestdist = dist;
      best = static_cast<int>(i);
    }
  }
  if (best < 0)
    throw NoConvergenceError("no critical multiplier found for the seed");
  const FloquetMode& mode_fn = fs.multipliers[best];
  double omega = torus ? std::arg(mode_fn.mu) / M_PI : 1.0;

  const CollocationMesh& mesh = pt.orbit.profile.mesh;
  MeshFunction vR(mesh, bs.n), vI(mesh, bs.n);
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    double s = mesh.rep_nodes(i);
    CVec w = fs.eval(mode_fn, s);
    Complex rot = std::exp(Complex(0.0, -M_PI * omega * s));
    CVec xv = torus ? (rot * w).eval() : w;
    vR.set_node(i, xv.real());
    vI.set_node(i, xv.imag());
  }
  double nrm = std::sqrt(mass_inner_product(vR, vR) +
                         (torus ? mass_inner_product(vI, vI) : 0.0));
  vR.coeffs /= nrm;
  vI.coeffs /= nrm;
  *bs.xv_ref_re = vR;
  *bs.xv_ref_im = vI;

  Vec y(bs.ds.dim_y);
  if (torus)
    y << pt.orbit.profile.coeffs, pt.orbit.T, pt.orbit.p(bs.pi),
        pt.orbit.p(bs.pj), vR.coeffs, vI.coeffs, omega;
  else
    y << pt.orbit.profile.coeffs, pt.orbit.T, pt.orbit.p(bs.pi),
        pt.orbit.p(bs.pj), vR.coeffs;
  return y;
}

// ------------------------------------------------------------ pitchfork PO

PoBifSystem pitchfork_po_system(const DdeSystem& sys, int pi, int pj,
                                const CollocationMesh& mesh) {
  PoBifSystem fold = fold_po_system(sys, pi, pj, mesh);
  PoBifSystem bs = fold;
  const int nc = bs.nc, n = bs.n;
  const int ncol = mesh.degree * mesh.NT;
  bs.ds.dim_y = 2 * nc + 5;  // dummy g appended

  MeshFunction e1 = sample(mesh, n, [n](double) {
    Vec v = Vec::Zero(n);
    v(0) = 1.0;
    return v;
  });
  Vec c1_row = quad_row(e1);  // integral of the first component

  DefiningSystem inner = fold.ds;
  bs.ds.residual = [inner, nc, n, ncol, c1_row](const Vec& y) {
    Vec yf = y.head(2 * nc + 4);
    double g = y(2 * nc + 4);
    Vec rf = inner.residual(yf);
    Vec r(2 * nc + 4);
    r.head(2 * nc + 3) = rf;
    for (int c = 0; c < ncol; ++c) r(c * n) += g;  // dummy forcing, zero at
                                                   // solutions
    r(2 * nc + 3) = c1_row.dot(y.head(nc));
    return r;
  };
  bs.ds.jacobian = [inner, nc, n, ncol, c1_row](const Vec& y) {
    Vec yf = y.head(2 * nc + 4);
    Mat Jf = inner.jacobian(yf);
    Mat J = Mat::Zero(2 * nc + 4, 2 * nc + 5);
    J.topLeftCorner(2 * nc + 3, 2 * nc + 4) = Jf;
    for (int c = 0; c < ncol; ++c) J(c * n, 2 * nc + 4) = 1.0;
    J.block(2 * nc + 3, 0, 1, nc) = c1_row.transpose();
    return J;
  };
  return bs;
}

Vec seed_pitchfork_po(const PoBifSystem& bs, const PoBranchPoint& pt) {
  PoBifSystem tmp = bs;
  Vec yf = seed_fold_po(tmp, pt);
  Vec y(yf.size() + 1);
  y << yf, 0.0;
  return y;
}

// --------------------------------------------------------------- resonances

std::vector<ResonancePoint> resonance_points(const PoBifSystem& bs,
                                             Branch& branch, int q_max,
                                             const ContinuationOptions& opts) {
  std::vector<ResonancePoint> out;
  if (bs.iomega < 0 || branch.points.size() < 2) return out;
  double lo = 1e300, hi = -1e300;
  for (const BranchPoint& pt : branch.points) {
    lo = std::min(lo, pt.y(bs.iomega));
    hi = std::max(hi, pt.y(bs.iomega));
  }
  std::vector<std::pair<std::string, TestFunction>> tests;
  std::vector<std::pair<int, int>> pq;
  for (int q = 1; q <= q_max; ++q)
    for (int p = 1; p < q; ++p) {
      if (std::gcd(p, q) != 1) continue;
      double target = 2.0 * p / q;
      if (target < lo || target > hi) continue;
      pq.emplace_back(p, q);
      int io = bs.iomega;
      tests.emplace_back(std::to_string(p) + ":" + std::to_string(q),
                         [io, target](const BranchPoint& b) {
                           return b.y(io) - target;
                         });
    }
  size_t before = branch.events.size();
  detect_events(bs.ds, branch, tests, opts);
  for (size_t i = before; i < branch.events.size(); ++i) {
    const BranchEvent& ev = branch.events[i];
    for (size_t k = 0; k < pq.size(); ++k) {
      if (tests[k].first != ev.name) continue;
      ResonancePoint rp;
      rp.p = pq[k].first;
      rp.q = pq[k].second;
      rp.location = ev.point;
      rp.resolved = ev.resolved;
      out.push_back(rp);
    }
  }
  return out;
}

}  // namespace ddec
