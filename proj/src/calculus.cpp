#include "vsub/calculus.hpp"

#include <algorithm>

namespace vsub {

std::vector<Mask> increasing_masks(int dim, int degree) {
  std::vector<Mask> out;
  if (degree < 0 || degree > dim) return out;
  Mask limit = Mask{1} << dim;
  for (Mask m = 0; m < limit; ++m)
    if (std::popcount(m) == degree) out.push_back(m);
  return out;
}

MetricJets metric_jets(const MetricChart& chart, const JetVec& x, bool need_christoffel) {
  MetricJets M;
  M.g = chart.metric_jets(x);
  const int m = chart.dim();
  if (M.g.rows != m || M.g.cols != m) throw std::logic_error("metric field returned wrong shape");
  M.ginv = inverse(M.g);
  M.det = determinant(M.g);
  if (!need_christoffel) return M;

  // dg[l](i,j) = d_l g_ij
  std::vector<Mat<Jet>> dg(m, Mat<Jet>(m, m));
  for (int l = 0; l < m; ++l)
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) {
        dg[l](i, j) = M.g(i, j).partial(l);
        if (j != i) dg[l](j, i) = dg[l](i, j);
      }

  M.gamma.assign(m, Mat<Jet>(m, m));
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) {
        Jet s;
        for (int l = 0; l < m; ++l)
          s += M.ginv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
        s *= 0.5;
        M.gamma[k](i, j) = s;
        if (j != i) M.gamma[k](j, i) = M.gamma[k](i, j);
      }
  return M;
}

std::pair<Mask, int> sort_index(std::span<const int> idx) {
  Mask m = 0;
  int inversions = 0;
  for (std::size_t s = 0; s < idx.size(); ++s) {
    Mask bit = Mask{1} << idx[s];
    if (m & bit) return {0, 0};
    inversions += std::popcount(m & ~(bit - 1));  // existing entries above this one
    m |= bit;
  }
  return {m, (inversions & 1) ? -1 : 1};
}

namespace {

Jet signed_coeff(const FormJets& F, std::span<const int> idx) {
  auto [m, s] = sort_index(idx);
  if (s == 0) return Jet();
  auto it = F.find(m);
  if (it == F.end()) return Jet();
  return s > 0 ? it->second : -it->second;
}

}  // namespace

FormJets d_jets(const FormJets& F, int degree, int dim) {
  FormJets out;
  if (degree >= dim) return out;  // top degree differentiates to zero
  for (const auto& [mask, c] : F) {
    for (int k = 0; k < dim; ++k) {
      Mask bit = Mask{1} << k;
      if (mask & bit) continue;
      int sign = (std::popcount(mask & (bit - 1)) & 1) ? -1 : 1;
      Jet term = c.partial(k);
      if (sign < 0) term = -term;
      auto [it, inserted] = out.try_emplace(mask | bit, term);
      if (!inserted) it->second += term;
    }
  }
  return out;
}

FormJets delta_jets(const FormJets& F, int degree, int dim, const MetricJets& M) {
  FormJets out;
  if (degree == 0) return out;
  const int p = degree;

  // cache partials of the stored coefficients
  std::map<Mask, std::vector<Jet>> dF;
  for (const auto& [mask, c] : F) {
    std::vector<Jet> parts(dim);
    for (int i = 0; i < dim; ++i) parts[i] = c.partial(i);
    dF.emplace(mask, std::move(parts));
  }
  auto signed_partial = [&](int i, std::span<const int> idx) {
    auto [m, s] = sort_index(idx);
    if (s == 0) return Jet();
    auto it = dF.find(m);
    if (it == dF.end()) return Jet();
    return s > 0 ? it->second[i] : -it->second[i];
  };

  std::vector<int> idx(p);
  for (Mask B : increasing_masks(dim, p - 1)) {
    std::vector<int> b = [&] {
      std::vector<int> v;
      for (int t = 0; t < dim; ++t)
        if (B & (Mask{1} << t)) v.push_back(t);
      return v;
    }();

    Jet acc;
    for (int i = 0; i < dim; ++i) {
      for (int k = 0; k < dim; ++k) {
        // covariant derivative component (nabla_i F)_{k, b...}
        idx[0] = k;
        std::copy(b.begin(), b.end(), idx.begin() + 1);
        Jet cd = signed_partial(i, idx);
        for (int l = 0; l < dim; ++l) {
          idx[0] = l;
          Jet w = signed_coeff(F, idx);
          if (!(w.is_scalar() && w.value() == 0.0)) cd -= M.gamma[l](i, k) * w;
        }
        idx[0] = k;
        for (int s = 0; s < p - 1; ++s) {
          int orig = b[s];
          for (int l = 0; l < dim; ++l) {
            idx[1 + s] = l;
            Jet w = signed_coeff(F, idx);
            if (!(w.is_scalar() && w.value() == 0.0)) cd -= M.gamma[l](i, orig) * w;
          }
          idx[1 + s] = orig;
        }
        acc += M.ginv(i, k) * cd;
      }
    }
    acc = -acc;
    if (!(acc.is_scalar() && acc.value() == 0.0)) out.emplace(B, std::move(acc));
  }
  return out;
}

FormJets laplacian_jets(const FormJets& F, int degree, int dim, const MetricJets& M) {
  FormJets out;
  if (degree < dim)
    out = delta_jets(d_jets(F, degree, dim), degree + 1, dim, M);
  if (degree > 0) {
    FormJets sd = d_jets(delta_jets(F, degree, dim, M), degree - 1, dim);
    for (auto& [mask, c] : sd) {
      auto [it, inserted] = out.try_emplace(mask, c);
      if (!inserted) it->second += c;
    }
  }
  return out;
}

MultiIndexForm form_values(const FormJets& F, int degree, int dim) {
  MultiIndexForm out(degree, dim);
  for (const auto& [m, c] : F) out.add(m, c.value());
  return out;
}

MultiIndexForm exterior_derivative(const FormField& w, std::span<const double> x, int order) {
  JetVec seeds = seed_point(x, order);
  return form_values(d_jets(w.eval_jets(seeds), w.degree(), w.dim()),
                     std::min(w.degree() + 1, w.dim()), w.dim());
}

MultiIndexForm codifferential(const FormField& w, std::span<const double> x, int order) {
  if (w.degree() == 0) return MultiIndexForm(0, w.dim());
  JetVec seeds = seed_point(x, order);
  MetricJets M = metric_jets(*w.chart(), seeds);
  return form_values(delta_jets(w.eval_jets(seeds), w.degree(), w.dim(), M), w.degree() - 1,
                     w.dim());
}

MultiIndexForm laplacian(const FormField& w, std::span<const double> x, int order) {
  JetVec seeds = seed_point(x, order);
  MetricJets M = metric_jets(*w.chart(), seeds);
  return form_values(laplacian_jets(w.eval_jets(seeds), w.degree(), w.dim(), M), w.degree(),
                     w.dim());
}

OrthoCoframe orthonormal_coframe(const MetricChart& chart, std::span<const double> x) {
  const int m = chart.dim();
  Matd g = chart.metric_at(x);
  Matd ginv = inverse(g);

  std::vector<std::vector<double>> covs;
  for (int j = 0; j < m; ++j) {
    std::vector<double> e(m, 0.0);
    e[j] = 1.0;
    covs.push_back(std::move(e));
  }
  auto ip = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) s += a[i] * ginv(i, j) * b[j];
    return s;
  };
  auto on = gram_schmidt(covs, ip, 1e-12);
  if (static_cast<int>(on.size()) != m)
    throw std::domain_error("orthonormal_coframe: metric not positive-definite at point");

  OrthoCoframe out;
  out.co = Matd(m, m);
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < m; ++k) out.co(j, k) = on[j][k];
  out.frame = inverse(out.co);
  return out;
}

MultiIndexForm to_orthonormal(const OrthoCoframe& cf, const MultiIndexForm& coords) {
  const int m = cf.frame.rows;
  std::vector<std::vector<double>> A(m, std::vector<double>(m));
  for (int r = 0; r < m; ++r)
    for (int k = 0; k < m; ++k) A[r][k] = cf.frame(k, r);  // row r = frame vector E_r
  return pullback_linear(A, coords);
}

double metric_norm(const MetricChart& chart, std::span<const double> x, const MultiIndexForm& a) {
  return norm(to_orthonormal(orthonormal_coframe(chart, x), a));
}

std::vector<double> lie_bracket(const VectorField& X, const VectorField& Y,
                                std::span<const double> x) {
  if (X.chart() != Y.chart()) throw std::invalid_argument("lie_bracket: chart mismatch");
  const int m = X.dim();
  JetVec seeds = seed_point(x, 1);
  auto Xc = X.eval_jets(seeds);
  auto Yc = Y.eval_jets(seeds);
  std::vector<double> out(m, 0.0);
  for (int k = 0; k < m; ++k) {
    Jet s;
    for (int j = 0; j < m; ++j)
      s += Xc[j] * Yc[k].partial(j) - Yc[j] * Xc[k].partial(j);
    out[k] = s.value();
  }
  return out;
}

double gauss_curvature(const MetricChart& chart, std::span<const double> x) {
  if (chart.dim() != 2) throw std::invalid_argument("gauss_curvature: chart must be 2-dimensional");
  JetVec seeds = seed_point(x, 2);
  MetricJets M = metric_jets(chart, seeds);

  // R_{1212} = g_{1l} R^l_{212},
  // R^l_{212} = d_1 Gamma^l_{22} - d_2 Gamma^l_{12}
  //           + Gamma^l_{1m} Gamma^m_{22} - Gamma^l_{2m} Gamma^m_{12}
  Jet r1212;
  for (int l = 0; l < 2; ++l) {
    Jet Rl = M.gamma[l](1, 1).partial(0) - M.gamma[l](0, 1).partial(1);
    for (int mm = 0; mm < 2; ++mm)
      Rl += M.gamma[l](0, mm) * M.gamma[mm](1, 1) - M.gamma[l](1, mm) * M.gamma[mm](0, 1);
    r1212 += M.g(0, l) * Rl;
  }
  double det = M.g(0, 0).value() * M.g(1, 1).value() - M.g(0, 1).value() * M.g(1, 0).value();
  return r1212.value() / det;
}

}  // namespace vsub
