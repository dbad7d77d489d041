#include "vsub/submersion.hpp"

#include <algorithm>
#include <cmath>

#include "vsub/rng.hpp"

namespace vsub {

namespace {

// g-inner product of component vectors (jets)
Jet g_inner(const Mat<Jet>& g, const std::vector<Jet>& u, const std::vector<Jet>& v) {
  Jet s;
  const int m = g.rows;
  for (int i = 0; i < m; ++i) {
    if (u[i].is_scalar() && u[i].value() == 0.0) continue;
    for (int j = 0; j < m; ++j) {
      if (v[j].is_scalar() && v[j].value() == 0.0) continue;
      s += u[i] * g(i, j) * v[j];
    }
  }
  return s;
}

std::vector<Jet> column(const Mat<Jet>& A, int c) {
  std::vector<Jet> v(A.rows);
  for (int r = 0; r < A.rows; ++r) v[r] = A(r, c);
  return v;
}

}  // namespace

FrameRemix random_remix(int fiber_dim, int base_dim, std::uint64_t seed) {
  CounterRng rng(seed);
  auto random_orthogonal = [&](int n) {
    std::vector<std::vector<double>> cols(n, std::vector<double>(n));
    for (auto& c : cols)
      for (auto& x : c) x = rng.normal();
    auto ip = [](const std::vector<double>& a, const std::vector<double>& b) {
      double s = 0;
      for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
      return s;
    };
    auto on = gram_schmidt(cols, ip, 1e-12);
    while (static_cast<int>(on.size()) < n) {  // astronomically unlikely
      std::vector<double> extra(n);
      for (auto& x : extra) x = rng.normal();
      auto more = on;
      more.push_back(extra);
      on = gram_schmidt(more, ip, 1e-12);
    }
    Matd q(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) q(i, j) = on[j][i];
    return q;
  };
  FrameRemix r;
  r.q_vert = random_orthogonal(fiber_dim);
  r.q_horiz = random_orthogonal(base_dim);
  return r;
}

SplitFrameJets split_frame_jets(const SubmersionModel& m, const JetVec& z, const Mat<Jet>& g,
                                const FrameRemix* remix) {
  const int mz = m.total_dim();
  const int my = m.base_dim();
  const int mx = m.fiber_dim();

  JetVec y = m.project_jets(z);
  Mat<Jet> J(my, mz);
  for (int a = 0; a < my; ++a)
    for (int k = 0; k < mz; ++k) J(a, k) = y[a].partial(k);

  auto kernel = kernel_basis(J);
  if (static_cast<int>(kernel.size()) != mx)
    throw std::domain_error("split_frame: dpi rank-deficient at point (singular point)");

  auto ip = [&](const std::vector<Jet>& u, const std::vector<Jet>& v) { return g_inner(g, u, v); };
  auto vert = gram_schmidt(kernel, ip, 1e-9);
  if (static_cast<int>(vert.size()) != mx)
    throw std::domain_error("split_frame: vertical frame degenerate");

  // horizontal complement: coordinate directions in ascending order
  std::vector<std::vector<Jet>> cand = vert;
  for (int k = 0; k < mz; ++k) {
    std::vector<Jet> e(mz);
    e[k] = Jet(1.0);
    cand.push_back(std::move(e));
  }
  auto all = gram_schmidt(cand, ip, 1e-9);
  if (static_cast<int>(all.size()) != mz)
    throw std::domain_error("split_frame: could not complete horizontal frame");
  std::vector<std::vector<Jet>> horiz(all.begin() + mx, all.end());

  if (remix) {
    auto mix = [](const std::vector<std::vector<Jet>>& f, const Matd& q) {
      const int n = static_cast<int>(f.size());
      std::vector<std::vector<Jet>> out(n, std::vector<Jet>(f[0].size()));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          if (q(j, i) == 0.0) continue;
          for (std::size_t k = 0; k < f[0].size(); ++k) out[i][k] += q(j, i) * f[j][k];
        }
      return out;
    };
    vert = mix(vert, remix->q_vert);
    horiz = mix(horiz, remix->q_horiz);
  }

  SplitFrameJets out;
  out.vert = Mat<Jet>(mz, mx);
  out.horiz = Mat<Jet>(mz, my);
  for (int i = 0; i < mx; ++i)
    for (int r = 0; r < mz; ++r) out.vert(r, i) = vert[i][r];
  for (int a = 0; a < my; ++a)
    for (int r = 0; r < mz; ++r) out.horiz(r, a) = horiz[a][r];

  // coframes are the metric duals
  out.vert_co = Mat<Jet>(mx, mz);
  out.horiz_co = Mat<Jet>(my, mz);
  for (int i = 0; i < mx; ++i)
    for (int k = 0; k < mz; ++k) {
      Jet s;
      for (int l = 0; l < mz; ++l) s += g(k, l) * out.vert(l, i);
      out.vert_co(i, k) = s;
    }
  for (int a = 0; a < my; ++a)
    for (int k = 0; k < mz; ++k) {
      Jet s;
      for (int l = 0; l < mz; ++l) s += g(k, l) * out.horiz(l, a);
      out.horiz_co(a, k) = s;
    }
  return out;
}

SplitFrame split_frame(const SubmersionModel& m, std::span<const double> z) {
  JetVec seeds = seed_point(z, 1);
  Mat<Jet> g = m.total()->metric_jets(seeds);
  auto fj = split_frame_jets(m, seeds, g);
  auto values = [](const Mat<Jet>& A) {
    Matd B(A.rows, A.cols);
    for (int r = 0; r < A.rows; ++r)
      for (int c = 0; c < A.cols; ++c) B(r, c) = A(r, c).value();
    return B;
  };
  return SplitFrame{values(fj.vert), values(fj.horiz), values(fj.vert_co), values(fj.horiz_co)};
}

namespace {

struct TensorJets {
  std::vector<Jet> theta_frame;   // m_Y
  std::vector<Jet> theta_coords;  // m_Z
  std::vector<Jet> omega;         // a,b,i
};

TensorJets tensor_jets(const SubmersionModel& m, const SplitFrameJets& fr, const Mat<Jet>& g) {
  const int mz = m.total_dim();
  const int my = m.base_dim();
  const int mx = m.fiber_dim();

  auto bracket = [&](const std::vector<Jet>& X, const std::vector<Jet>& Y) {
    std::vector<Jet> out(mz);
    for (int k = 0; k < mz; ++k) {
      Jet s;
      for (int j = 0; j < mz; ++j) {
        if (!(X[j].is_scalar() && X[j].value() == 0.0)) s += X[j] * Y[k].partial(j);
        if (!(Y[j].is_scalar() && Y[j].value() == 0.0)) s -= Y[j] * X[k].partial(j);
      }
      out[k] = s;
    }
    return out;
  };

  TensorJets T;
  T.theta_frame.assign(my, Jet());
  T.theta_coords.assign(mz, Jet());
  T.omega.assign(static_cast<std::size_t>(my) * my * mx, Jet());

  std::vector<std::vector<Jet>> verts(mx), horizs(my);
  for (int i = 0; i < mx; ++i) verts[i] = column(fr.vert, i);
  for (int a = 0; a < my; ++a) horizs[a] = column(fr.horiz, a);

  // theta_a = - sum_i g([e_i, f_a], e_i)
  for (int a = 0; a < my; ++a) {
    Jet s;
    for (int i = 0; i < mx; ++i) {
      auto br = bracket(verts[i], horizs[a]);
      s += g_inner(g, br, verts[i]);
    }
    T.theta_frame[a] = -s;
  }
  for (int k = 0; k < mz; ++k) {
    Jet s;
    for (int a = 0; a < my; ++a) s += T.theta_frame[a] * fr.horiz_co(a, k);
    T.theta_coords[k] = s;
  }

  // omega_abi = 1/2 g(e_i, [f_a, f_b]),   a < b, antisymmetric fill
  for (int a = 0; a < my; ++a)
    for (int b = a + 1; b < my; ++b) {
      auto br = bracket(horizs[a], horizs[b]);
      for (int i = 0; i < mx; ++i) {
        Jet w = g_inner(g, verts[i], br) * 0.5;
        T.omega[(static_cast<std::size_t>(a) * my + b) * mx + i] = w;
        T.omega[(static_cast<std::size_t>(b) * my + a) * mx + i] = -w;
      }
    }
  return T;
}

}  // namespace

double ThetaOmega::theta_norm() const {
  double s = 0;
  for (double v : theta_frame) s += v * v;
  return std::sqrt(s);
}

double ThetaOmega::omega_norm() const {
  double s = 0;
  for (double v : omega) s += v * v;
  return std::sqrt(s);
}

ThetaOmega theta_omega(const SubmersionModel& m, std::span<const double> z,
                       const FrameRemix* remix) {
  JetVec seeds = seed_point(z, 2);
  Mat<Jet> g = m.total()->metric_jets(seeds);
  auto fr = split_frame_jets(m, seeds, g, remix);
  auto T = tensor_jets(m, fr, g);

  ThetaOmega out;
  out.base_dim = m.base_dim();
  out.fiber_dim = m.fiber_dim();
  out.total_dim = m.total_dim();
  for (const auto& j : T.theta_frame) out.theta_frame.push_back(j.value());
  for (const auto& j : T.theta_coords) out.theta_coords.push_back(j.value());
  for (const auto& j : T.omega) out.omega.push_back(j.value());

  // frame-independent coordinate 3-tensor sum omega_abi f^a x f^b x e^i
  const int mz = out.total_dim;
  out.omega_coords.assign(static_cast<std::size_t>(mz) * mz * mz, 0.0);
  for (int a = 0; a < out.base_dim; ++a)
    for (int b = 0; b < out.base_dim; ++b)
      for (int i = 0; i < out.fiber_dim; ++i) {
        double w = out.om(a, b, i);
        if (w == 0.0) continue;
        for (int j = 0; j < mz; ++j) {
          double fa = fr.horiz_co(a, j).value();
          if (fa == 0.0) continue;
          for (int k = 0; k < mz; ++k) {
            double fb = fr.horiz_co(b, k).value();
            if (fb == 0.0) continue;
            for (int l = 0; l < mz; ++l)
              out.omega_coords[(static_cast<std::size_t>(j) * mz + k) * mz + l] +=
                  w * fa * fb * fr.vert_co(i, l).value();
          }
        }
      }
  return out;
}

Covector mean_curvature_theta(const SubmersionModel& m, std::span<const double> z) {
  auto t = theta_omega(m, z);
  Covector c;
  c.comp = std::move(t.theta_frame);
  return c;
}

std::vector<double> curvature_omega(const SubmersionModel& m, std::span<const double> z) {
  return theta_omega(m, z).omega;
}

MultiIndexForm xi_apply(const SubmersionModel& m, std::span<const double> z,
                        const MultiIndexForm& alpha_split) {
  auto t = theta_omega(m, z);
  return xi_apply_split<double>(t.theta_frame, t.omega, m.base_dim(), m.fiber_dim(), alpha_split);
}

// -- pullbacks ---------------------------------------------------------------

FormJets pullback_form_jets(const SubmersionModel& m, const FormField& phi, const JetVec& z) {
  const int mz = m.total_dim();
  const int my = m.base_dim();
  JetVec y = m.project_jets(z);
  FormJets phi_y = phi.eval_jets(y);

  // dpi^a as total-chart 1-forms
  std::vector<BasicForm<Jet>> dpi;
  dpi.reserve(my);
  for (int a = 0; a < my; ++a) {
    BasicForm<Jet> w(1, mz);
    for (int k = 0; k < mz; ++k) {
      Jet c = y[a].partial(k);
      if (!(c.is_scalar() && c.value() == 0.0)) w.set(Mask{1} << k, c);
    }
    dpi.push_back(std::move(w));
  }

  BasicForm<Jet> acc(phi.degree(), mz);
  for (const auto& [mask, c] : phi_y) {
    BasicForm<Jet> term = BasicForm<Jet>::scalar(mz, c);
    Mask rest = mask;
    while (rest != 0) {
      int bit = std::countr_zero(rest);
      rest &= rest - 1;
      term = wedge(term, dpi[bit]);
    }
    acc += term;
  }

  FormJets out;
  for (const auto& [mask, c] : acc.coeffs()) out.emplace(mask, c);
  return out;
}

FormField pullback_form_field(ModelPtr m, const FormField& phi) {
  const int p = phi.degree();
  std::map<Mask, ScalarField> coeffs;
  auto masks = increasing_masks(m->total_dim(), p);
  auto phi_copy = std::make_shared<FormField>(phi);
  for (Mask mask : masks) {
    coeffs.emplace(mask, [m, phi_copy, mask](const JetVec& z) -> Jet {
      FormJets all = pullback_form_jets(*m, *phi_copy, z);
      auto it = all.find(mask);
      return it == all.end() ? Jet() : it->second;
    });
  }
  return FormField(m->total(), p, std::move(coeffs));
}

// -- conversions between coordinates and the split coframe --------------------

namespace {

template <class T>
std::vector<std::vector<T>> frame_rows(const Mat<T>& vert, const Mat<T>& horiz) {
  const int mz = vert.rows;
  const int mx = vert.cols, my = horiz.cols;
  std::vector<std::vector<T>> rows;
  rows.reserve(mx + my);
  for (int i = 0; i < mx; ++i) {
    std::vector<T> r(mz);
    for (int k = 0; k < mz; ++k) r[k] = vert(k, i);
    rows.push_back(std::move(r));
  }
  for (int a = 0; a < my; ++a) {
    std::vector<T> r(mz);
    for (int k = 0; k < mz; ++k) r[k] = horiz(k, a);
    rows.push_back(std::move(r));
  }
  return rows;
}

template <class T>
std::vector<std::vector<T>> coframe_cols(const Mat<T>& vert_co, const Mat<T>& horiz_co) {
  const int mz = vert_co.cols;
  const int mx = vert_co.rows, my = horiz_co.rows;
  std::vector<std::vector<T>> rows(mz, std::vector<T>(mx + my));
  for (int k = 0; k < mz; ++k) {
    for (int i = 0; i < mx; ++i) rows[k][i] = vert_co(i, k);
    for (int a = 0; a < my; ++a) rows[k][mx + a] = horiz_co(a, k);
  }
  return rows;
}

std::vector<std::vector<double>> value_rows(const std::vector<std::vector<Jet>>& rows) {
  std::vector<std::vector<double>> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out[i].reserve(rows[i].size());
    for (const auto& j : rows[i]) out[i].push_back(j.value());
  }
  return out;
}

}  // namespace

// -- residual checks -----------------------------------------------------------

namespace {

// relative defect of lhs = rhs, normalized like a backward error by the
// largest term participating in the identity
double rel_defect(const MultiIndexForm& lhs, const MultiIndexForm& rhs, double term_scale = 0.0) {
  double scale = std::max({norm(lhs), norm(rhs), term_scale});
  return norm(lhs - rhs) / (1.0 + scale);
}

}  // namespace

IntertwinePoint intertwining_point(const SubmersionModel& m, const FormField& phi,
                                   std::span<const double> z) {
  const int mz = m.total_dim();
  const int my = m.base_dim();
  const int mx = m.fiber_dim();
  const int p = phi.degree();

  JetVec seeds = seed_point(z, 4);
  MetricJets MZ = metric_jets(*m.total(), seeds);
  auto fr = split_frame_jets(m, seeds, MZ.g);
  auto T = tensor_jets(m, fr, MZ.g);

  // value-level conversion matrices
  auto split_rows = value_rows(frame_rows(fr.vert, fr.horiz));
  auto coord_rows = value_rows(coframe_cols(fr.vert_co, fr.horiz_co));
  auto to_split = [&](const MultiIndexForm& a) { return pullback_linear(split_rows, a); };
  auto to_coords = [&](const MultiIndexForm& a) { return pullback_linear(coord_rows, a); };

  std::vector<double> theta_v, omega_v;
  for (const auto& j : T.theta_frame) theta_v.push_back(j.value());
  for (const auto& j : T.omega) omega_v.push_back(j.value());

  // pullback of phi as jets and the base-side quantities
  FormJets P = pullback_form_jets(m, phi, seeds);
  Point y = m.project(z);
  JetVec yseeds = seed_point(y, 3);
  MetricJets MY = metric_jets(*m.base(), yseeds);
  FormJets phiY = phi.eval_jets(yseeds);

  // value-level pullback matrix for base-side results: rows = z-basis images
  JetVec yj = m.project_jets(seeds);
  std::vector<std::vector<double>> dpiT(mz, std::vector<double>(my));
  for (int k = 0; k < mz; ++k)
    for (int a = 0; a < my; ++a) dpiT[k][a] = yj[a].partial(k).value();
  auto pull_value = [&](const MultiIndexForm& a) { return pullback_linear(dpiT, a); };

  // identity 1: delta_Z pi* - pi* delta_Y = Xi pi*
  MultiIndexForm dZP = form_values(delta_jets(P, p, mz, MZ), std::max(p - 1, 0), mz);
  MultiIndexForm dYphi = form_values(delta_jets(phiY, p, my, MY), std::max(p - 1, 0), my);
  MultiIndexForm lhs1 = p >= 1 ? dZP - pull_value(dYphi) : MultiIndexForm(0, mz);
  MultiIndexForm Pval = form_values(P, p, mz);
  MultiIndexForm rhs1 = p >= 1 ? to_coords(xi_apply_split<double>(
                                     theta_v, omega_v, my, mx, to_split(Pval)))
                               : MultiIndexForm(0, mz);
  double scale1 = p >= 1 ? std::max(norm(to_split(dZP)), norm(to_split(pull_value(dYphi)))) : 0.0;
  double res1 = rel_defect(to_split(lhs1), to_split(rhs1), scale1);

  // identity 2: Delta_Z pi* - pi* Delta_Y = (d Xi + Xi d) pi*
  MultiIndexForm LZP = form_values(laplacian_jets(P, p, mz, MZ), p, mz);
  MultiIndexForm LYphi = form_values(laplacian_jets(phiY, p, my, MY), p, my);
  MultiIndexForm lhs2 = LZP - pull_value(LYphi);

  // Xi d pi*phi at value level
  MultiIndexForm dP = form_values(d_jets(P, p, mz), std::min(p + 1, mz), mz);
  MultiIndexForm xi_dP = p + 1 <= mz
                             ? to_coords(xi_apply_split<double>(theta_v, omega_v, my, mx,
                                                                to_split(dP)))
                             : MultiIndexForm(p, mz) * 0.0;

  // d Xi pi*phi: apply Xi in jet arithmetic, convert with jet frames, then d
  MultiIndexForm d_xiP(p, mz);
  if (p >= 1) {
    BasicForm<Jet> Pj(p, mz);
    for (const auto& [mask, c] : P) Pj.set(mask, c);
    auto split_rows_j = frame_rows(fr.vert, fr.horiz);
    auto coord_rows_j = coframe_cols(fr.vert_co, fr.horiz_co);
    BasicForm<Jet> Pj_split = pullback_linear(split_rows_j, Pj);
    BasicForm<Jet> xiPj_split =
        xi_apply_split<Jet>(T.theta_frame, T.omega, my, mx, Pj_split);
    BasicForm<Jet> xiPj = pullback_linear(coord_rows_j, xiPj_split);
    FormJets xiP;
    for (const auto& [mask, c] : xiPj.coeffs()) xiP.emplace(mask, c);
    d_xiP = form_values(d_jets(xiP, p - 1, mz), p, mz);
  }

  MultiIndexForm rhs2 = d_xiP;
  if (p + 1 <= mz) rhs2 += xi_dP;
  MultiIndexForm pulled_LY = pull_value(LYphi);
  double scale2 = std::max(norm(to_split(LZP)), norm(to_split(pulled_LY)));
  double res2 = rel_defect(to_split(lhs2), to_split(rhs2), scale2);

  // plain commutation defect (no term rescaling: this measures the defect)
  double res3 = rel_defect(to_split(LZP), to_split(pulled_LY));

  return IntertwinePoint{res1, res2, res3};
}

double pullback_eigen_residual(const SubmersionModel& m, const FormField& phi, double mu,
                               std::span<const double> z) {
  const int mz = m.total_dim();
  const int p = phi.degree();
  JetVec seeds = seed_point(z, 3);
  MetricJets MZ = metric_jets(*m.total(), seeds);
  FormJets P = pullback_form_jets(m, phi, seeds);
  MultiIndexForm LZP = form_values(laplacian_jets(P, p, mz, MZ), p, mz);
  MultiIndexForm Pval = form_values(P, p, mz);

  auto fr = split_frame_jets(m, seeds, MZ.g);
  auto split_rows = value_rows(frame_rows(fr.vert, fr.horiz));
  MultiIndexForm diff = pullback_linear(split_rows, LZP - mu * Pval);
  MultiIndexForm Ps = pullback_linear(split_rows, Pval);
  return norm(diff) / ((1.0 + std::abs(mu)) * norm(Ps));
}

double eigen_residual(const FormField& phi, double lambda, std::span<const double> x) {
  MultiIndexForm L = laplacian(phi, x);
  MultiIndexForm v = phi.eval(x);
  const MetricChart& chart = *phi.chart();
  auto cf = orthonormal_coframe(chart, x);
  MultiIndexForm diff = to_orthonormal(cf, L - lambda * v);
  MultiIndexForm von = to_orthonormal(cf, v);
  return norm(diff) / ((1.0 + std::abs(lambda)) * norm(von));
}

double submersion_isometry_residual(const SubmersionModel& m, std::span<const double> z) {
  JetVec seeds = seed_point(z, 1);
  Mat<Jet> g = m.total()->metric_jets(seeds);
  auto fr = split_frame_jets(m, seeds, g);
  JetVec y = m.project_jets(seeds);
  const int my = m.base_dim(), mz = m.total_dim(), mx = m.fiber_dim();

  Point ypt;
  for (const auto& j : y) ypt.push_back(j.value());
  Matd gY = m.base()->metric_at(ypt);

  // dpi applied to the frame columns, values
  Matd J(my, mz);
  for (int a = 0; a < my; ++a)
    for (int k = 0; k < mz; ++k) J(a, k) = y[a].partial(k).value();

  double worst = 0.0;
  // vertical: dpi e_i = 0
  for (int i = 0; i < mx; ++i)
    for (int a = 0; a < my; ++a) {
      double s = 0;
      for (int k = 0; k < mz; ++k) s += J(a, k) * fr.vert(k, i).value();
      worst = std::max(worst, std::abs(s));
    }
  // horizontal: g_Y(dpi f_a, dpi f_b) = delta
  for (int a = 0; a < my; ++a)
    for (int b = 0; b < my; ++b) {
      double s = 0;
      for (int c = 0; c < my; ++c)
        for (int d = 0; d < my; ++d) {
          double ja = 0, jb = 0;
          for (int k = 0; k < mz; ++k) ja += J(c, k) * fr.horiz(k, a).value();
          for (int k = 0; k < mz; ++k) jb += J(d, k) * fr.horiz(k, b).value();
          s += gY(c, d) * ja * jb;
        }
      worst = std::max(worst, std::abs(s - (a == b ? 1.0 : 0.0)));
    }
  return worst;
}

// -- constructions ---------------------------------------------------------------

ModelPtr fiber_product(const ModelPtr& m1, const ModelPtr& m2, std::string name) {
  if (!m1->flags().bundle_form || !m2->flags().bundle_form)
    throw std::invalid_argument("fiber_product: factors must be bundle-form models");
  if (m1->base() != m2->base())
    throw std::invalid_argument("fiber_product: factors must share the base chart");

  const int x1 = m1->fiber_dim(), x2 = m2->fiber_dim();
  const int my = m1->base_dim();
  const int mz = x1 + x2 + my;

  const Box& b1 = m1->total()->sample_box();
  const Box& b2 = m2->total()->sample_box();
  Box box;
  box.lo.insert(box.lo.end(), b1.lo.begin(), b1.lo.begin() + x1);
  box.hi.insert(box.hi.end(), b1.hi.begin(), b1.hi.begin() + x1);
  box.lo.insert(box.lo.end(), b2.lo.begin(), b2.lo.begin() + x2);
  box.hi.insert(box.hi.end(), b2.hi.begin(), b2.hi.begin() + x2);
  box.lo.insert(box.lo.end(), b1.lo.begin() + x1, b1.lo.end());
  box.hi.insert(box.hi.end(), b1.hi.begin() + x1, b1.hi.end());

  ChartPtr base = m1->base();
  ChartPtr t1 = m1->total();
  ChartPtr t2 = m2->total();

  MetricField metric = [t1, t2, base, x1, x2, my, mz](const JetVec& z) {
    JetVec z1(z.begin(), z.begin() + x1);
    z1.insert(z1.end(), z.begin() + x1 + x2, z.end());
    JetVec z2(z.begin() + x1, z.begin() + x1 + x2);
    z2.insert(z2.end(), z.begin() + x1 + x2, z.end());
    JetVec y(z.begin() + x1 + x2, z.end());

    Mat<Jet> g1 = t1->metric_jets(z1);
    Mat<Jet> g2 = t2->metric_jets(z2);
    Mat<Jet> gY = base->metric_jets(y);

    Mat<Jet> g(mz, mz);
    for (int i = 0; i < x1; ++i)
      for (int j = 0; j < x1; ++j) g(i, j) = g1(i, j);
    for (int i = 0; i < x2; ++i)
      for (int j = 0; j < x2; ++j) g(x1 + i, x1 + j) = g2(i, j);
    for (int i = 0; i < x1; ++i)
      for (int a = 0; a < my; ++a) {
        g(i, x1 + x2 + a) = g1(i, x1 + a);
        g(x1 + x2 + a, i) = g1(i, x1 + a);
      }
    for (int i = 0; i < x2; ++i)
      for (int a = 0; a < my; ++a) {
        g(x1 + i, x1 + x2 + a) = g2(i, x2 + a);
        g(x1 + x2 + a, x1 + i) = g2(i, x2 + a);
      }
    for (int a = 0; a < my; ++a)
      for (int b = 0; b < my; ++b)
        g(x1 + x2 + a, x1 + x2 + b) =
            g1(x1 + a, x1 + b) + g2(x2 + a, x2 + b) - gY(a, b);
    return g;
  };

  auto chart = std::make_shared<MetricChart>(mz, box, metric);
  chart->set_boundary_margin(
      std::max(m1->total()->boundary_margin(), m2->total()->boundary_margin()));

  // lift exclusion zones from the factors
  auto lift = [&](const MetricChart& src, bool first) {
    for (const auto& zone : src.excluded()) {
      ExclusionZone z2 = zone;
      int fx = first ? x1 : x2;
      int off = first ? 0 : x1;
      z2.gauge = [g = zone.gauge, fx, off, x1, x2](std::span<const double> z) {
        std::vector<double> w;
        w.reserve(fx + (z.size() - x1 - x2));
        for (int i = 0; i < fx; ++i) w.push_back(z[off + i]);
        for (std::size_t i = x1 + x2; i < z.size(); ++i) w.push_back(z[i]);
        return g(w);
      };
      chart->add_exclusion(std::move(z2));
    }
  };
  lift(*m1->total(), true);
  lift(*m2->total(), false);

  std::vector<ScalarField> proj;
  for (int a = 0; a < my; ++a) proj.push_back(coordinate_field(x1 + x2 + a));

  ModelFlags flags;
  flags.bundle_form = true;
  flags.fibers_minimal_expected =
      m1->flags().fibers_minimal_expected && m2->flags().fibers_minimal_expected;
  flags.horizontal_integrable_expected = m1->flags().horizontal_integrable_expected &&
                                         m2->flags().horizontal_integrable_expected;
  flags.full_measure = m1->flags().full_measure && m2->flags().full_measure;

  return std::make_shared<SubmersionModel>(std::move(name), chart, base, std::move(proj), flags);
}

double fiber_product_theta_residual(const SubmersionModel& prod, const SubmersionModel& m1,
                                    const SubmersionModel& m2, std::span<const double> z) {
  const int x1 = m1.fiber_dim(), x2 = m2.fiber_dim();
  const int my = prod.base_dim(), mz = prod.total_dim();

  Point z1, z2;
  for (int i = 0; i < x1; ++i) z1.push_back(z[i]);
  for (int i = 0; i < x2; ++i) z2.push_back(z[x1 + i]);
  for (int a = 0; a < my; ++a) {
    z1.push_back(z[x1 + x2 + a]);
    z2.push_back(z[x1 + x2 + a]);
  }

  auto tp = theta_omega(prod, z);
  auto t1 = theta_omega(m1, z1);
  auto t2 = theta_omega(m2, z2);

  // sigma_i* theta_i in product coordinates
  std::vector<double> expect(mz, 0.0);
  for (int i = 0; i < x1; ++i) expect[i] += t1.theta_coords[i];
  for (int i = 0; i < x2; ++i) expect[x1 + i] += t2.theta_coords[i];
  for (int a = 0; a < my; ++a)
    expect[x1 + x2 + a] += t1.theta_coords[x1 + a] + t2.theta_coords[x2 + a];

  MultiIndexForm got(1, mz), want(1, mz);
  for (int k = 0; k < mz; ++k) {
    got.set(Mask{1} << k, tp.theta_coords[k]);
    want.set(Mask{1} << k, expect[k]);
  }
  double scale = 1.0 + std::max(metric_norm(*prod.total(), z, got),
                                metric_norm(*prod.total(), z, want));
  return metric_norm(*prod.total(), z, got - want) / scale;
}

ModelPtr conformal_variation(const ModelPtr& m, ScalarField psi_on_base, double t,
                             std::string name) {
  if (!m->flags().bundle_form)
    throw std::invalid_argument("conformal_variation: needs a bundle-form model");
  const int mx = m->fiber_dim(), my = m->base_dim(), mz = m->total_dim();
  ChartPtr tot = m->total();

  MetricField metric = [tot, psi_on_base, t, mx, my, mz](const JetVec& z) {
    Mat<Jet> g = tot->metric_jets(z);
    if (t == 0.0) return g;
    JetVec y(z.begin() + mx, z.end());
    Jet psi = psi_on_base(y);
    if (psi.value() <= 0.0)
      throw std::domain_error("conformal_variation: psi must be positive");
    Jet s = pow(psi, 2.0 * t);

    Mat<Jet> G(mx, mx), C(mx, my);
    for (int i = 0; i < mx; ++i)
      for (int j = 0; j < mx; ++j) G(i, j) = g(i, j);
    for (int i = 0; i < mx; ++i)
      for (int a = 0; a < my; ++a) C(i, a) = g(i, mx + a);
    Mat<Jet> Ginv = inverse(G);
    Mat<Jet> CtGinvC = mat_mul(transpose(C), mat_mul(Ginv, C));

    Mat<Jet> out(mz, mz);
    for (int i = 0; i < mx; ++i)
      for (int j = 0; j < mx; ++j) out(i, j) = s * G(i, j);
    for (int i = 0; i < mx; ++i)
      for (int a = 0; a < my; ++a) {
        out(i, mx + a) = s * C(i, a);
        out(mx + a, i) = out(i, mx + a);
      }
    for (int a = 0; a < my; ++a)
      for (int b = 0; b < my; ++b)
        out(mx + a, mx + b) = g(mx + a, mx + b) + (s - 1.0) * CtGinvC(a, b);
    return out;
  };

  auto chart = std::make_shared<MetricChart>(mz, tot->sample_box(), metric);
  chart->set_boundary_margin(tot->boundary_margin());
  for (const auto& z : tot->excluded()) chart->add_exclusion(z);

  std::vector<ScalarField> proj;
  for (int a = 0; a < my; ++a) proj.push_back(coordinate_field(mx + a));

  return std::make_shared<SubmersionModel>(std::move(name), chart, m->base(), std::move(proj),
                                           m->flags());
}

ModelPtr product_with_circle(const ModelPtr& m, std::string name) {
  const int mz = m->total_dim(), my = m->base_dim();
  constexpr double kTwoPi = 6.283185307179586476925286766559;

  auto extend_chart = [kTwoPi](const ChartPtr& src) {
    Box box = src->sample_box();
    box.lo.push_back(0.0);
    box.hi.push_back(kTwoPi);
    const int n = src->dim();
    MetricField metric = [src, n](const JetVec& z) {
      JetVec w(z.begin(), z.begin() + n);
      Mat<Jet> g0 = src->metric_jets(w);
      Mat<Jet> g(n + 1, n + 1);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = g0(i, j);
      g(n, n) = Jet(1.0);
      return g;
    };
    auto chart = std::make_shared<MetricChart>(n + 1, box, metric);
    chart->set_boundary_margin(src->boundary_margin());
    for (const auto& zone : src->excluded()) {
      ExclusionZone z2 = zone;
      z2.gauge = [g = zone.gauge, n](std::span<const double> z) {
        return g(z.subspan(0, n));
      };
      chart->add_exclusion(std::move(z2));
    }
    return chart;
  };

  auto total = extend_chart(m->total());
  auto base = extend_chart(m->base());

  std::vector<ScalarField> proj;
  for (int a = 0; a < my; ++a) {
    ScalarField f = m->projection()[a];
    proj.push_back([f, mz](const JetVec& z) {
      JetVec w(z.begin(), z.begin() + mz);
      return f(w);
    });
  }
  proj.push_back(coordinate_field(mz));

  return std::make_shared<SubmersionModel>(std::move(name), total, base, std::move(proj),
                                           m->flags());
}

namespace {

Jet fiber_volume_jet(const SubmersionModel& m, const JetVec& yseeds, int nodes) {
  const int mx = m.fiber_dim(), my = m.base_dim(), mz = m.total_dim();
  const Box& box = m.total()->sample_box();
  std::vector<int> idx(mx, 0);
  Jet acc;
  bool done = false;
  while (!done) {
    double w = 1.0;
    JetVec zq(mz);
    for (int i = 0; i < mx; ++i) {
      double h = (box.hi[i] - box.lo[i]) / nodes;
      zq[i] = Jet(box.lo[i] + idx[i] * h);
      w *= (idx[i] == 0 || idx[i] == nodes) ? h / 2.0 : h;
    }
    for (int a = 0; a < my; ++a) zq[mx + a] = yseeds[a];
    Mat<Jet> g = m.total()->metric_jets(zq);
    Mat<Jet> G(mx, mx);
    for (int i = 0; i < mx; ++i)
      for (int j = 0; j < mx; ++j) G(i, j) = g(i, j);
    acc += w * sqrt(determinant(G));
    int d = 0;
    while (d < mx) {
      if (++idx[d] <= nodes) break;
      idx[d] = 0;
      ++d;
    }
    if (d == mx) done = true;
  }
  return acc;
}

}  // namespace

ScalarField fiber_volume_field(const ModelPtr& m, int nodes) {
  if (!m->flags().bundle_form)
    throw std::invalid_argument("fiber_volume_field: needs a bundle-form model");
  return [m, nodes](const JetVec& y) { return fiber_volume_jet(*m, y, nodes); };
}

PotentialResidual minimality_potential_residual(const SubmersionModel& m,
                                                std::span<const double> z, int nodes) {
  if (!m.flags().bundle_form)
    throw std::invalid_argument("minimality_potential: needs a bundle-form model");
  const int mx = m.fiber_dim(), my = m.base_dim(), mz = m.total_dim();

  Point y(z.begin() + mx, z.end());
  JetVec yseeds = seed_point(y, 2);

  Jet psi = fiber_volume_jet(m, yseeds, nodes);
  Jet psi2 = fiber_volume_jet(m, yseeds, 2 * nodes);
  double quad_delta = std::abs(psi.value() - psi2.value()) / (1.0 + std::abs(psi2.value()));

  Jet lnpsi = log(psi2);
  MultiIndexForm minus_dlnpsi(1, mz);
  for (int a = 0; a < my; ++a) {
    // guard: lnpsi is a jet in the base variables embedded in z indices
    minus_dlnpsi.set(Mask{1} << (mx + a), -lnpsi.partial(a).value());
  }

  auto t = theta_omega(m, z);
  MultiIndexForm theta(1, mz);
  for (int k = 0; k < mz; ++k) theta.set(Mask{1} << k, t.theta_coords[k]);

  double scale = 1.0 + std::max(metric_norm(*m.total(), z, theta),
                                metric_norm(*m.total(), z, minus_dlnpsi));
  double res = metric_norm(*m.total(), z, theta - minus_dlnpsi) / scale;
  return PotentialResidual{res, quad_delta};
}

}  // namespace vsub
