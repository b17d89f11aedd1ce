#include "auxabc/lgdbn.hpp"

#include <cmath>
#include <stdexcept>

namespace auxabc {

bool AuxiliaryFit::operator==(const AuxiliaryFit& o) const {
  auto same = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
  };
  if (horizon != o.horizon || state_dims != o.state_dims || action_dims != o.action_dims) return false;
  if (!same(mu_x, o.mu_x) || !same(mu_a, o.mu_a) || !same(sigma, o.sigma) || !same(v_x, o.v_x)) return false;
  if (psi_x.size() != o.psi_x.size() || psi_a.size() != o.psi_a.size()) return false;
  for (std::size_t t = 0; t < psi_x.size(); ++t)
    if (!same(psi_x[t], o.psi_x[t]) || !same(psi_a[t], o.psi_a[t])) return false;
  return true;
}

SummaryLayout::SummaryLayout(Eigen::Index H, Eigen::Index dx, Eigen::Index da)
    : horizon_(H), state_dims_(dx), action_dims_(da) {
  auto add = [this](const char* name, Eigen::Index n) {
    segments_.push_back({name, size_, static_cast<std::size_t>(n)});
    size_ += static_cast<std::size_t>(n);
  };
  add("mu_x", (H + 1) * dx);
  add("mu_a", H * da);
  add("psi_x", H * dx * dx);
  add("psi_a", H * dx * da);
  add("sigma", H * da);
  add("v_x", (H + 1) * dx);
}

std::string SummaryLayout::label(std::size_t pos) const {
  if (pos >= size_) throw std::out_of_range("SummaryLayout::label: position out of range");
  for (const auto& seg : segments_) {
    if (pos >= seg.offset + seg.size) continue;
    auto k = static_cast<Eigen::Index>(pos - seg.offset);
    if (seg.name == "psi_x" || seg.name == "psi_a") {
      Eigen::Index cols = seg.name == "psi_x" ? state_dims_ : action_dims_;
      Eigen::Index per_t = state_dims_ * cols;
      Eigen::Index t = k / per_t, r = (k % per_t) / cols, c = (k % per_t) % cols;
      return seg.name + "[t=" + std::to_string(t + 1) + "](" + std::to_string(r) + "," + std::to_string(c) + ")";
    }
    Eigen::Index width = (seg.name == "mu_x" || seg.name == "v_x") ? state_dims_ : action_dims_;
    return seg.name + "[t=" + std::to_string(k / width + 1) + "](" + std::to_string(k % width) + ")";
  }
  return {};
}

AuxiliaryFit fit_mle(const Dataset& data) {
  data.validate();
  const auto m = static_cast<Eigen::Index>(data.size());
  if (m < 2) throw std::invalid_argument("fit_mle: need at least 2 trajectories, got " + std::to_string(m));

  AuxiliaryFit fit;
  const Eigen::Index H = data.horizon();
  const Eigen::Index dx = data.state_dims();
  const Eigen::Index da = data.action_dims();
  fit.horizon = H;
  fit.state_dims = dx;
  fit.action_dims = da;

  // centered[t] is m x dx (states), centered_a[t] is m x da (actions)
  std::vector<Eigen::MatrixXd> centered(static_cast<std::size_t>(H + 1), Eigen::MatrixXd(m, dx));
  std::vector<Eigen::MatrixXd> centered_a(static_cast<std::size_t>(H), Eigen::MatrixXd(m, da));
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& tr = data.trajectories[static_cast<std::size_t>(i)];
    for (Eigen::Index t = 0; t <= H; ++t) centered[static_cast<std::size_t>(t)].row(i) = tr.states.row(t);
    for (Eigen::Index t = 0; t < H && da > 0; ++t) centered_a[static_cast<std::size_t>(t)].row(i) = tr.actions.row(t);
  }

  fit.mu_x.resize(H + 1, dx);
  fit.v_x.resize(H + 1, dx);
  for (Eigen::Index t = 0; t <= H; ++t) {
    auto& X = centered[static_cast<std::size_t>(t)];
    fit.mu_x.row(t) = X.colwise().mean();
    X.rowwise() -= fit.mu_x.row(t);
    fit.v_x.row(t) = (X.array().square().colwise().sum() / static_cast<double>(m)).sqrt();
  }
  fit.mu_a.resize(H, da);
  fit.sigma.resize(H, da);
  for (Eigen::Index t = 0; t < H; ++t) {
    auto& A = centered_a[static_cast<std::size_t>(t)];
    if (da == 0) continue;
    fit.mu_a.row(t) = A.colwise().mean();
    A.rowwise() -= fit.mu_a.row(t);
    fit.sigma.row(t) = (A.array().square().colwise().sum() / static_cast<double>(m)).sqrt();
  }

  // Per-transition least squares; with diagonal V the GLS weighting cancels
  // output by output. Rank-deficient designs get the minimum-norm solution.
  fit.psi_x.reserve(static_cast<std::size_t>(H));
  fit.psi_a.reserve(static_cast<std::size_t>(H));
  Eigen::MatrixXd design(m, dx + da);
  for (Eigen::Index t = 0; t < H; ++t) {
    design.leftCols(dx) = centered[static_cast<std::size_t>(t)];
    if (da > 0) design.rightCols(da) = centered_a[static_cast<std::size_t>(t)];
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
    Eigen::MatrixXd coef = cod.solve(centered[static_cast<std::size_t>(t + 1)]);  // (dx+da) x dx
    fit.psi_x.push_back(coef.topRows(dx).transpose());
    fit.psi_a.push_back(coef.bottomRows(da).transpose());
  }
  return fit;
}

SummaryStatistics flatten(const AuxiliaryFit& fit) {
  SummaryStatistics s;
  s.layout = SummaryLayout(fit.horizon, fit.state_dims, fit.action_dims);
  s.eta.resize(static_cast<Eigen::Index>(s.layout.size()));
  Eigen::Index k = 0;
  auto put_rows = [&](const Eigen::MatrixXd& M) {
    for (Eigen::Index r = 0; r < M.rows(); ++r)
      for (Eigen::Index c = 0; c < M.cols(); ++c) s.eta[k++] = M(r, c);
  };
  put_rows(fit.mu_x);
  put_rows(fit.mu_a);
  for (const auto& P : fit.psi_x) put_rows(P);
  for (const auto& P : fit.psi_a) put_rows(P);
  put_rows(fit.sigma);
  put_rows(fit.v_x);
  return s;
}

AuxiliaryFit unflatten(const SummaryStatistics& stats) {
  const auto& L = stats.layout;
  if (static_cast<std::size_t>(stats.eta.size()) != L.size())
    throw std::invalid_argument("unflatten: eta length does not match layout");
  AuxiliaryFit fit;
  const Eigen::Index H = L.horizon(), dx = L.state_dims(), da = L.action_dims();
  fit.horizon = H;
  fit.state_dims = dx;
  fit.action_dims = da;
  Eigen::Index k = 0;
  auto take_rows = [&](Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd M(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) M(r, c) = stats.eta[k++];
    return M;
  };
  fit.mu_x = take_rows(H + 1, dx);
  fit.mu_a = take_rows(H, da);
  for (Eigen::Index t = 0; t < H; ++t) fit.psi_x.push_back(take_rows(dx, dx));
  for (Eigen::Index t = 0; t < H; ++t) fit.psi_a.push_back(take_rows(dx, da));
  fit.sigma = take_rows(H, da);
  fit.v_x = take_rows(H + 1, dx);
  return fit;
}

SummaryStatistics summarize(const Dataset& data) { return flatten(fit_mle(data)); }

namespace {

// Offset of x_t (t 0-based) and a_t in the stacked trajectory vector.
Eigen::Index state_offset(Eigen::Index t, Eigen::Index dx, Eigen::Index da) { return t * (dx + da); }
Eigen::Index action_offset(Eigen::Index t, Eigen::Index dx, Eigen::Index da) { return t * (dx + da) + dx; }

}  // namespace

Eigen::MatrixXd coefficient_matrix(const AuxiliaryFit& fit) {
  const Eigen::Index H = fit.horizon, dx = fit.state_dims, da = fit.action_dims;
  const Eigen::Index n = (H + 1) * dx + H * da;
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index t = 0; t < H; ++t) {
    const auto row = state_offset(t + 1, dx, da);
    B.block(row, state_offset(t, dx, da), dx, dx) = fit.psi_x[static_cast<std::size_t>(t)];
    if (da > 0) B.block(row, action_offset(t, dx, da), dx, da) = fit.psi_a[static_cast<std::size_t>(t)];
  }
  return B;
}

JointGaussian joint_distribution(const AuxiliaryFit& fit) {
  const Eigen::Index H = fit.horizon, dx = fit.state_dims, da = fit.action_dims;
  const Eigen::Index n = (H + 1) * dx + H * da;
  JointGaussian out;
  out.mean.resize(n);
  Eigen::VectorXd sd(n);
  for (Eigen::Index t = 0; t <= H; ++t) {
    out.mean.segment(state_offset(t, dx, da), dx) = fit.mu_x.row(t).transpose();
    sd.segment(state_offset(t, dx, da), dx) = fit.v_x.row(t).transpose();
    if (t < H && da > 0) {
      out.mean.segment(action_offset(t, dx, da), da) = fit.mu_a.row(t).transpose();
      sd.segment(action_offset(t, dx, da), da) = fit.sigma.row(t).transpose();
    }
  }
  // I - B is unit lower triangular in stacked order.
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) - coefficient_matrix(fit);
  Eigen::MatrixXd root = A.triangularView<Eigen::UnitLower>().solve(Eigen::MatrixXd(sd.asDiagonal()));
  out.covariance = root * root.transpose();
  return out;
}

Dataset sample_auxiliary(const AuxiliaryFit& fit, std::size_t count, std::uint64_t key) {
  const Eigen::Index H = fit.horizon, dx = fit.state_dims, da = fit.action_dims;
  Dataset out;
  out.trajectories.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    RandomStream rng = replicate_stream(key, i);
    Trajectory tr;
    tr.states.resize(H + 1, dx);
    tr.actions.resize(H, da);
    for (Eigen::Index k = 0; k < dx; ++k) tr.states(0, k) = fit.mu_x(0, k) + fit.v_x(0, k) * rng.normal();
    for (Eigen::Index t = 0; t < H; ++t) {
      for (Eigen::Index k = 0; k < da; ++k) tr.actions(t, k) = fit.mu_a(t, k) + fit.sigma(t, k) * rng.normal();
      Eigen::VectorXd dev = fit.psi_x[static_cast<std::size_t>(t)] * (tr.states.row(t) - fit.mu_x.row(t)).transpose();
      if (da > 0) dev += fit.psi_a[static_cast<std::size_t>(t)] * (tr.actions.row(t) - fit.mu_a.row(t)).transpose();
      for (Eigen::Index k = 0; k < dx; ++k)
        tr.states(t + 1, k) = fit.mu_x(t + 1, k) + dev[k] + fit.v_x(t + 1, k) * rng.normal();
    }
    out.trajectories.push_back(std::move(tr));
  }
  return out;
}

}  // namespace auxabc
