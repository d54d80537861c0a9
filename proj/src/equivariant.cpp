#include "ringgnn/equivariant.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "ringgnn/graph.hpp"

namespace ringgnn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

MuClass canonical(std::array<int, 4> labels) {
  MuClass mu;
  std::array<int, 4> seen{};
  int next = 0;
  for (int p = 0; p < 4; ++p) {
    int id = 0;
    for (int q = 0; q < next; ++q) {
      if (seen[q] == labels[p]) id = q + 1;
    }
    if (id == 0) {
      seen[next++] = labels[p];
      id = next;
    }
    mu.pattern[p] = id;
  }
  return mu;
}

// Row sums etc. of one n x n slice, shared by all 15 closed forms.
struct SliceStats {
  double total = 0.0;
  double trace = 0.0;
  std::vector<double> row_off;  // sum_{q != i} x[i][q]
  std::vector<double> col_off;  // sum_{p != i} x[p][i]
};

SliceStats slice_stats(const double* x, int n) {
  SliceStats s;
  s.row_off.assign(n, 0.0);
  s.col_off.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double v = x[i * n + j];
      s.total += v;
      if (i == j) {
        s.trace += v;
      } else {
        s.row_off[i] += v;
        s.col_off[j] += v;
      }
    }
  }
  return s;
}

// Closed form of basis `idx` (canonical order) at output entry (i, j).
// Classes 0..9 live on off-diagonal outputs, 10..14 on the diagonal.
void fill_basis(int idx, const double* x, int n, const SliceStats& s, double scale, double* out) {
  const double off = s.total - s.trace;
  const auto& R = s.row_off;
  const auto& C = s.col_off;
  auto X = [&](int i, int j) { return x[i * n + j]; };
  std::fill(out, out + static_cast<std::ptrdiff_t>(n) * n, 0.0);
  if (idx < 10) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        double v = 0.0;
        switch (idx) {
          case 0: v = off - R[i] - R[j] - C[i] - C[j] + X(i, j) + X(j, i); break;
          case 1: v = s.trace - X(i, i) - X(j, j); break;
          case 2: v = C[i] - X(j, i); break;
          case 3: v = R[i] - X(i, j); break;
          case 4: v = C[j] - X(i, j); break;
          case 5: v = R[j] - X(j, i); break;
          case 6: v = X(i, i); break;
          case 7: v = X(j, j); break;
          case 8: v = X(i, j); break;
          case 9: v = X(j, i); break;
        }
        out[i * n + j] = scale * v;
      }
    }
  } else {
    for (int i = 0; i < n; ++i) {
      double v = 0.0;
      switch (idx) {
        case 10: v = off - R[i] - C[i]; break;
        case 11: v = s.trace - X(i, i); break;
        case 12: v = C[i]; break;
        case 13: v = R[i]; break;
        case 14: v = X(i, i); break;
      }
      out[i * n + i] = scale * v;
    }
  }
}

double norm_factor(int idx, int n, bool normalize) {
  if (!normalize) return 1.0;
  return 1.0 / std::pow(static_cast<double>(n), mu_free_indices(mu_classes()[idx]));
}

const std::array<int, kBasisCount>& transpose_table() {
  static const std::array<int, kBasisCount> table = [] {
    std::array<int, kBasisCount> t{};
    for (int i = 0; i < kBasisCount; ++i) t[i] = mu_index(mu_transpose(mu_classes()[i]));
    return t;
  }();
  return table;
}

}  // namespace

std::string MuClass::to_string() const {
  std::ostringstream os;
  os << '(' << pattern[0] << ',' << pattern[1] << ',' << pattern[2] << ',' << pattern[3] << ')';
  return os.str();
}

const std::array<MuClass, kBasisCount>& mu_classes() {
  static const std::array<MuClass, kBasisCount> classes{{
      {{1, 2, 3, 4}}, {{1, 1, 2, 3}}, {{1, 2, 2, 3}}, {{1, 2, 1, 3}}, {{1, 2, 3, 2}},
      {{1, 2, 3, 1}}, {{1, 1, 1, 2}}, {{1, 1, 2, 1}}, {{1, 2, 1, 2}}, {{1, 2, 2, 1}},
      {{1, 2, 3, 3}}, {{1, 1, 2, 2}}, {{1, 2, 2, 2}}, {{1, 2, 1, 1}}, {{1, 1, 1, 1}},
  }};
  return classes;
}

int mu_index(const MuClass& mu) {
  const auto& all = mu_classes();
  for (int i = 0; i < kBasisCount; ++i) {
    if (all[i] == mu) return i;
  }
  throw ParameterError("not a canonical equality pattern: " + mu.to_string());
}

MuClass mu_of(int a1, int a2, int b1, int b2) { return canonical({a1, a2, b1, b2}); }

MuClass mu_transpose(const MuClass& mu) {
  const auto& p = mu.pattern;
  return canonical({p[2], p[3], p[0], p[1]});
}

int mu_free_indices(const MuClass& mu) {
  const auto& p = mu.pattern;
  // Labels of the output pair are fixed by b; the rest are summed over.
  const int all = *std::max_element(p.begin(), p.end());
  const std::set<int> out_labels{p[2], p[3]};
  return all - static_cast<int>(out_labels.size());
}

bool mu_membership(std::pair<int, int> a, std::pair<int, int> b, const MuClass& mu) {
  return mu_of(a.first, a.second, b.first, b.second) == mu;
}

void apply_all_bases(std::span<const double> x, int n, std::span<double> out, bool normalize) {
  const std::size_t nn = static_cast<std::size_t>(n) * n;
  if (x.size() != nn || out.size() != nn * kBasisCount) {
    throw DimensionError("apply_all_bases: buffer sizes do not match n = " + std::to_string(n));
  }
  const SliceStats s = slice_stats(x.data(), n);
  for (int i = 0; i < kBasisCount; ++i) {
    fill_basis(i, x.data(), n, s, norm_factor(i, n, normalize), out.data() + i * nn);
  }
}

Tensor apply_basis(const Tensor& x, const MuClass& mu) {
  if (x.rank() != 2 || x.dim(0) != x.dim(1)) {
    throw DimensionError("apply_basis: expected an n x n matrix, got " + shape_string(x.shape()));
  }
  const int n = x.dim(0);
  const int idx = mu_index(mu);
  std::vector<double> out(static_cast<std::size_t>(n) * n);
  fill_basis(idx, x.values().data(), n, slice_stats(x.values().data(), n), 1.0, out.data());
  return Tensor::make_result(
      {n, n}, std::move(out), {x}, [n, idx](std::span<const double> g, std::vector<Tensor>& p) {
        const int adj = transpose_table()[idx];
        std::vector<double> back(static_cast<std::size_t>(n) * n);
        fill_basis(adj, g.data(), n, slice_stats(g.data(), n), 1.0, back.data());
        p[0].accumulate_grad(back);
      });
}

Tensor apply_bias(BiasClass bias, int n) {
  if (n < 1) throw ParameterError("apply_bias: n must be positive");
  std::vector<double> out(static_cast<std::size_t>(n) * n, bias == BiasClass::kOffDiagonal ? 1.0 : 0.0);
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i) * n + i] = bias == BiasClass::kDiagonal ? 1.0 : 0.0;
  return Tensor::from_values({n, n}, std::move(out));
}

namespace {

// The 15 basis weights of one (k, k') pair folded onto the terms they share.
// Off-diagonal output (i != j):
//   c_total*off + c_trace*tr + aR*R_i + aC*C_i + aD*D_i + bR*R_j + bC*C_j + bD*D_j + a*X_ij + b*X_ji
// Diagonal output:
//   d_total*off + d_trace*tr + gR*R_i + gC*C_i + gD*D_i
// where off/tr are the off-diagonal total and trace, R/C the off-diagonal row
// and column sums and D the diagonal.
struct Folded {
  double c_total, c_trace, aR, aC, aD, bR, bC, bD, a, b, d_total, d_trace, gR, gC, gD;
};

Folded fold(const double* w) {
  Folded f;
  f.c_total = w[0];
  f.c_trace = w[1];
  f.aR = -w[0] + w[3];
  f.aC = -w[0] + w[2];
  f.aD = -w[1] + w[6];
  f.bR = -w[0] + w[5];
  f.bC = -w[0] + w[4];
  f.bD = -w[1] + w[7];
  f.a = w[0] - w[3] - w[4] + w[8];
  f.b = w[0] - w[2] - w[5] + w[9];
  f.d_total = w[10];
  f.d_trace = w[11];
  f.gR = -w[10] + w[13];
  f.gC = -w[10] + w[12];
  f.gD = -w[11] + w[14];
  return f;
}

// Per-slice statistics of a [c, n, n] buffer.
struct ChannelStats {
  std::vector<double> off, trace;
  RowMat R, C, D;  // c x n
};

ChannelStats channel_stats(const double* x, int c, int n) {
  ChannelStats s;
  s.off.assign(c, 0.0);
  s.trace.assign(c, 0.0);
  s.R = RowMat::Zero(c, n);
  s.C = RowMat::Zero(c, n);
  s.D = RowMat::Zero(c, n);
  for (int k = 0; k < c; ++k) {
    const double* xk = x + static_cast<std::ptrdiff_t>(k) * n * n;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double v = xk[i * n + j];
        if (i == j) {
          s.D(k, i) = v;
          s.trace[k] += v;
        } else {
          s.R(k, i) += v;
          s.C(k, j) += v;
          s.off[k] += v;
        }
      }
    }
  }
  return s;
}

// Slice-wise transpose of a c x n^2 row-major matrix.
RowMat transpose_slices(const double* x, int c, int n) {
  RowMat t(c, n * n);
  for (int k = 0; k < c; ++k) {
    const double* xk = x + static_cast<std::ptrdiff_t>(k) * n * n;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) t(k, j * n + i) = xk[i * n + j];
  }
  return t;
}

}  // namespace

Tensor equivariant_layer(const Tensor& x, const Tensor& theta, bool normalize) {
  if (x.rank() != 3 || x.dim(1) != x.dim(2)) {
    throw DimensionError("equivariant_layer: expected x of shape [d, n, n], got " + shape_string(x.shape()));
  }
  const int d = x.dim(0);
  const int n = x.dim(1);
  if (theta.rank() != 3 || theta.dim(0) != d || theta.dim(2) != kLayerWeights) {
    throw DimensionError("equivariant_layer: theta must be [" + std::to_string(d) + ", d', " +
                         std::to_string(kLayerWeights) + "], got " + shape_string(theta.shape()));
  }
  const int dp = theta.dim(1);
  const int nn = n * n;

  std::array<double, kBasisCount> nf{};
  for (int i = 0; i < kBasisCount; ++i) nf[i] = norm_factor(i, n, normalize);

  // folded[k * dp + kp], with the normalisation already applied.
  auto th = theta.values();
  std::vector<Folded> folded(static_cast<std::size_t>(d) * dp);
  Eigen::VectorXd off_bias = Eigen::VectorXd::Zero(dp);
  Eigen::VectorXd diag_bias = Eigen::VectorXd::Zero(dp);
  RowMat wa(dp, d), wb(dp, d);
  for (int k = 0; k < d; ++k) {
    for (int kp = 0; kp < dp; ++kp) {
      const double* cell = &th[(static_cast<std::size_t>(k) * dp + kp) * kLayerWeights];
      std::array<double, kBasisCount> w{};
      for (int i = 0; i < kBasisCount; ++i) w[i] = cell[i] * nf[i];
      const Folded f = fold(w.data());
      folded[k * dp + kp] = f;
      wa(kp, k) = f.a;
      wb(kp, k) = f.b;
      off_bias[kp] += cell[kBasisCount];
      diag_bias[kp] += cell[kBasisCount + 1];
    }
  }

  auto stats = std::make_shared<ChannelStats>(channel_stats(x.values().data(), d, n));
  Eigen::Map<const RowMat> xmat(x.values().data(), d, nn);
  RowMat xt = transpose_slices(x.values().data(), d, n);

  std::vector<double> out(static_cast<std::size_t>(dp) * nn);
  Eigen::Map<RowMat> out_map(out.data(), dp, nn);
  out_map.noalias() = wa * xmat;
  out_map.noalias() += wb * xt;

  std::vector<double> u(n), v(n), g(n);
  for (int kp = 0; kp < dp; ++kp) {
    double c_off = off_bias[kp], c_diag = diag_bias[kp];
    std::fill(u.begin(), u.end(), 0.0);
    std::fill(v.begin(), v.end(), 0.0);
    std::fill(g.begin(), g.end(), 0.0);
    for (int k = 0; k < d; ++k) {
      const Folded& f = folded[k * dp + kp];
      c_off += f.c_total * stats->off[k] + f.c_trace * stats->trace[k];
      c_diag += f.d_total * stats->off[k] + f.d_trace * stats->trace[k];
      for (int i = 0; i < n; ++i) {
        const double r = stats->R(k, i), c = stats->C(k, i), dd = stats->D(k, i);
        u[i] += f.aR * r + f.aC * c + f.aD * dd;
        v[i] += f.bR * r + f.bC * c + f.bD * dd;
        g[i] += f.gR * r + f.gC * c + f.gD * dd;
      }
    }
    double* ok = out.data() + static_cast<std::ptrdiff_t>(kp) * nn;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) ok[i * n + j] += c_off + u[i] + v[j];
      ok[i * n + i] = c_diag + g[i];
    }
  }

  auto folded_shared = std::make_shared<std::vector<Folded>>(std::move(folded));
  auto wa_shared = std::make_shared<RowMat>(std::move(wa));
  auto wb_shared = std::make_shared<RowMat>(std::move(wb));
  return Tensor::make_result(
      {dp, n, n}, std::move(out), {x, theta},
      [d, dp, n, nn, nf, stats, folded_shared, wa_shared, wb_shared](std::span<const double> grad,
                                                                     std::vector<Tensor>& p) {
        const auto& folded = *folded_shared;
        // Masked gradient (diagonal zeroed) and its slice transpose.
        RowMat gm = Eigen::Map<const RowMat>(grad.data(), dp, nn);
        std::vector<double> s_off(dp, 0.0), s_diag(dp, 0.0);
        RowMat gr = RowMat::Zero(dp, n), gc = RowMat::Zero(dp, n), gd(dp, n);
        for (int kp = 0; kp < dp; ++kp) {
          for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
              const double v = gm(kp, i * n + j);
              if (i == j) continue;
              gr(kp, i) += v;
              gc(kp, j) += v;
              s_off[kp] += v;
            }
            gd(kp, i) = gm(kp, i * n + i);
            s_diag[kp] += gd(kp, i);
            gm(kp, i * n + i) = 0.0;
          }
        }
        RowMat gmt = transpose_slices(gm.data(), dp, n);

        if (p[1].requires_grad()) {
          const Tensor& x = p[0];
          Eigen::Map<const RowMat> xmat(x.values().data(), d, nn);
          RowMat qa = xmat * gm.transpose();   // d x dp: <X_k, Gm_k'>
          RowMat qb = xmat * gmt.transpose();  // d x dp: <X_k^T, Gm_k'>
          auto dth = p[1].mutable_grad();
          for (int k = 0; k < d; ++k) {
            for (int kp = 0; kp < dp; ++kp) {
              const double pRr = stats->R.row(k).dot(gr.row(kp)), pCr = stats->C.row(k).dot(gr.row(kp));
              const double pDr = stats->D.row(k).dot(gr.row(kp));
              const double pRc = stats->R.row(k).dot(gc.row(kp)), pCc = stats->C.row(k).dot(gc.row(kp));
              const double pDc = stats->D.row(k).dot(gc.row(kp));
              const double dR = stats->R.row(k).dot(gd.row(kp)), dC = stats->C.row(k).dot(gd.row(kp));
              const double dD = stats->D.row(k).dot(gd.row(kp));
              const double a = qa(k, kp), b = qb(k, kp);
              const double off = stats->off[k], tr = stats->trace[k];
              std::array<double, kBasisCount> dw{
                  off * s_off[kp] - pRr - pCr - pRc - pCc + a + b,
                  tr * s_off[kp] - pDr - pDc,
                  pCr - b,
                  pRr - a,
                  pCc - a,
                  pRc - b,
                  pDr,
                  pDc,
                  a,
                  b,
                  off * s_diag[kp] - dR - dC,
                  tr * s_diag[kp] - dD,
                  dC,
                  dR,
                  dD,
              };
              double* cell = &dth[(static_cast<std::size_t>(k) * dp + kp) * kLayerWeights];
              for (int i = 0; i < kBasisCount; ++i) cell[i] += dw[i] * nf[i];
              cell[kBasisCount] += s_off[kp];
              cell[kBasisCount + 1] += s_diag[kp];
            }
          }
        }

        if (p[0].requires_grad()) {
          RowMat dx = wa_shared->transpose() * gm;
          dx.noalias() += wb_shared->transpose() * gmt;
          std::vector<double> eR(n), eC(n), eD(n);
          for (int k = 0; k < d; ++k) {
            double e_off = 0.0, e_tr = 0.0;
            std::fill(eR.begin(), eR.end(), 0.0);
            std::fill(eC.begin(), eC.end(), 0.0);
            std::fill(eD.begin(), eD.end(), 0.0);
            for (int kp = 0; kp < dp; ++kp) {
              const Folded& f = folded[k * dp + kp];
              e_off += f.c_total * s_off[kp] + f.d_total * s_diag[kp];
              e_tr += f.c_trace * s_off[kp] + f.d_trace * s_diag[kp];
              for (int i = 0; i < n; ++i) {
                eR[i] += f.aR * gr(kp, i) + f.bR * gc(kp, i) + f.gR * gd(kp, i);
                eC[i] += f.aC * gr(kp, i) + f.bC * gc(kp, i) + f.gC * gd(kp, i);
                eD[i] += f.aD * gr(kp, i) + f.bD * gc(kp, i) + f.gD * gd(kp, i);
              }
            }
            for (int i = 0; i < n; ++i) {
              for (int j = 0; j < n; ++j) {
                dx(k, i * n + j) += i == j ? e_tr + eD[i] : e_off + eR[i] + eC[j];
              }
            }
          }
          p[0].accumulate_grad(std::span<const double>(dx.data(), static_cast<std::size_t>(d) * nn));
        }
      });
}

Tensor invariant_readout(const Tensor& x, double w_diag, double w_offdiag) {
  return add(scale(reduce(ReduceKind::kSumDiag, x), w_diag), scale(reduce(ReduceKind::kSumOffDiag, x), w_offdiag));
}

// ---------------------------------------------------------------- count tables

char pair_set_letter(PairSet s) {
  switch (s) {
    case PairSet::kEdge: return 'E';
    case PairSet::kNonEdge: return 'N';
    case PairSet::kSelf: return 'S';
  }
  return '?';
}

long long closed_form_count(PairSet counter, PairSet tau, const MuClass& mu, long long n, long long d) {
  const int idx = mu_index(mu);
  const long long nd1 = n - d - 1;
  const bool e = tau == PairSet::kEdge, nn = tau == PairSet::kNonEdge, s = tau == PairSet::kSelf;
  switch (counter) {
    case PairSet::kEdge:
      switch (idx) {
        case 0: return e ? (n - 4) * d + 2 : nn ? (n - 4) * d : 0;
        case 2: case 3: case 4: case 5: return e ? d - 1 : nn ? d : 0;
        case 8: case 9: return e ? 1 : 0;
        case 10: return s ? (n - 2) * d : 0;
        case 12: case 13: return s ? d : 0;
        default: return 0;
      }
    case PairSet::kNonEdge:
      switch (idx) {
        case 0: return e ? (n - 4) * nd1 : nn ? (n - 4) * nd1 + 2 : 0;
        case 2: case 3: case 4: case 5: return e ? nd1 : nn ? nd1 - 1 : 0;
        case 8: case 9: return nn ? 1 : 0;
        case 10: return s ? (n - 2) * nd1 : 0;
        case 12: case 13: return s ? nd1 : 0;
        default: return 0;
      }
    case PairSet::kSelf:
      switch (idx) {
        case 1: return s ? 0 : n - 2;
        case 6: case 7: return s ? 0 : 1;
        case 11: return s ? n - 1 : 0;
        case 14: return s ? 1 : 0;
        default: return 0;
      }
  }
  return 0;
}

bool CountTableReport::all_match() const {
  return std::all_of(cells.begin(), cells.end(), [](const CountCell& c) { return c.match(); }) &&
         std::all_of(totals.begin(), totals.end(), [](const CountTotal& t) { return t.match(); });
}

std::string CountTableReport::to_csv() const {
  std::ostringstream os;
  os << "mu,tau,counter,closed_form,brute_force,match\n";
  for (const auto& c : cells) {
    os << '"' << c.mu.to_string() << "\"," << pair_set_letter(c.tau) << ",m_" << pair_set_letter(c.counter) << ','
       << c.closed_form << ',' << c.brute_force << ',' << (c.match() ? "true" : "false") << '\n';
  }
  for (const auto& t : totals) {
    os << "Total," << pair_set_letter(t.tau) << ",m_" << pair_set_letter(t.counter) << ',' << t.expected << ','
       << t.brute_force << ',' << (t.match() ? "true" : "false") << '\n';
  }
  return os.str();
}

CountTableReport compute_count_tables(int n, int degree, std::uint64_t seed) {
  if (degree < 1 || degree > n - 2) {
    // E and N must both be non-empty for every column to be defined.
    throw ParameterError("count tables need 1 <= d <= n - 2, got n = " + std::to_string(n) +
                         ", d = " + std::to_string(degree));
  }
  const Graph g = generate_random_regular(n, degree, seed);
  auto set_of = [&](int i, int j) {
    if (i == j) return PairSet::kSelf;
    return g.has_edge(i, j) ? PairSet::kEdge : PairSet::kNonEdge;
  };

  // counts[tau][mu][counter] for the first b seen in tau; uniform flags
  // record whether every other b of tau agreed.
  constexpr PairSet kSets[3] = {PairSet::kEdge, PairSet::kNonEdge, PairSet::kSelf};
  std::array<std::array<std::array<long long, 3>, kBasisCount>, 3> first{};
  std::array<std::array<bool, kBasisCount>, 3> uniform{};
  std::array<bool, 3> seen{};
  for (auto& row : uniform) row.fill(true);

  std::map<std::array<int, 4>, int> lookup;
  for (int i = 0; i < kBasisCount; ++i) lookup[mu_classes()[i].pattern] = i;

  for (int b1 = 0; b1 < n; ++b1) {
    for (int b2 = 0; b2 < n; ++b2) {
      const int tau = static_cast<int>(set_of(b1, b2));
      std::array<std::array<long long, 3>, kBasisCount> counts{};
      for (int a1 = 0; a1 < n; ++a1) {
        for (int a2 = 0; a2 < n; ++a2) {
          const int mu = lookup.at(mu_of(a1, a2, b1, b2).pattern);
          ++counts[mu][static_cast<int>(set_of(a1, a2))];
        }
      }
      if (!seen[tau]) {
        first[tau] = counts;
        seen[tau] = true;
      } else {
        for (int mu = 0; mu < kBasisCount; ++mu) {
          if (counts[mu] != first[tau][mu]) uniform[tau][mu] = false;
        }
      }
    }
  }

  CountTableReport report;
  report.n = n;
  report.degree = degree;
  report.seed = seed;
  for (int mu = 0; mu < kBasisCount; ++mu) {
    for (PairSet tau : kSets) {
      for (PairSet counter : kSets) {
        CountCell c;
        c.mu = mu_classes()[mu];
        c.tau = tau;
        c.counter = counter;
        c.closed_form = closed_form_count(counter, tau, c.mu, n, degree);
        c.brute_force = first[static_cast<int>(tau)][mu][static_cast<int>(counter)];
        c.uniform_over_b = uniform[static_cast<int>(tau)][mu];
        report.cells.push_back(c);
      }
    }
  }
  const long long n_ll = n;
  for (PairSet tau : kSets) {
    for (PairSet counter : kSets) {
      CountTotal t;
      t.tau = tau;
      t.counter = counter;
      t.expected = counter == PairSet::kEdge      ? n_ll * degree
                   : counter == PairSet::kNonEdge ? n_ll * (n_ll - degree - 1)
                                                  : n_ll;
      for (int mu = 0; mu < kBasisCount; ++mu) t.brute_force += first[static_cast<int>(tau)][mu][static_cast<int>(counter)];
      report.totals.push_back(t);
    }
  }
  return report;
}

CountTableReport verify_count_tables(int n, int degree, std::uint64_t seed) {
  CountTableReport report = compute_count_tables(n, degree, seed);
  for (const auto& c : report.cells) {
    if (!c.match()) {
      std::ostringstream os;
      os << "count table mismatch at mu = " << c.mu.to_string() << ", tau = " << pair_set_letter(c.tau)
         << ", m_" << pair_set_letter(c.counter) << ": expected " << c.closed_form << ", got " << c.brute_force
         << (c.uniform_over_b ? "" : " (count varies with b)");
      throw VerificationError(os.str());
    }
  }
  for (const auto& t : report.totals) {
    if (!t.match()) {
      std::ostringstream os;
      os << "count table total mismatch at tau = " << pair_set_letter(t.tau) << ", m_" << pair_set_letter(t.counter)
         << ": expected " << t.expected << ", got " << t.brute_force;
      throw VerificationError(os.str());
    }
  }
  return report;
}

}  // namespace ringgnn
