#include "torusflow/flow_map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace torusflow {

VelocityPath::VelocityPath(double t_begin, double dt) : t_begin_(t_begin), dt_(dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("VelocityPath: dt must be > 0");
}

VelocityPath VelocityPath::steady(const SpectralField& u) {
  VelocityPath p(0.0, 1.0);
  p.steady_ = true;
  p.fields_.push_back(u);
  return p;
}

void VelocityPath::append(const SpectralField& u) { fields_.push_back(u); }

double VelocityPath::t_end() const {
  if (steady_) return std::numeric_limits<double>::infinity();
  return fields_.empty() ? t_begin_ : t_begin_ + dt_ * static_cast<double>(fields_.size() - 1);
}

SpectralField VelocityPath::at_time(double t) const {
  if (steady_) return fields_.front();
  const double eps = 1e-9 * dt_;
  if (fields_.empty() || t < t_begin_ - eps || t > t_end() + eps) {
    throw std::out_of_range("velocity path does not cover t = " + std::to_string(t) +
                            "; covered interval is [" + std::to_string(t_begin_) + ", " +
                            std::to_string(t_end()) + "]");
  }
  if (fields_.size() == 1) return fields_.front();
  const double s = std::clamp((t - t_begin_) / dt_, 0.0, static_cast<double>(fields_.size() - 1));
  const std::size_t i = std::min(static_cast<std::size_t>(s), fields_.size() - 2);
  const double w = s - static_cast<double>(i);
  if (w <= 0.0) return fields_[i];
  if (w >= 1.0) return fields_[i + 1];
  SpectralField out = fields_[i];
  out *= (1.0 - w);
  out.axpy(w, fields_[i + 1]);
  return out;
}

FlowMap FlowMap::identity(int grid_resolution) {
  if (grid_resolution < 4) throw std::invalid_argument("FlowMap: grid too small");
  FlowMap f;
  f.m_ = grid_resolution;
  f.displacement_.assign(static_cast<std::size_t>(grid_resolution) * grid_resolution, Vec2{});
  return f;
}

FlowMap FlowMap::from_map(int grid_resolution, const std::function<Vec2(const Vec2&)>& map) {
  FlowMap f = identity(grid_resolution);
  for (int i = 0; i < grid_resolution; ++i)
    for (int j = 0; j < grid_resolution; ++j) {
      const Vec2 g = f.grid_point(i, j);
      const Vec2 p = map(g);
      f.set_displacement(i, j, {p.x - g.x, p.y - g.y});
    }
  return f;
}

std::pair<double, double> FlowMap::jacobian_range() const {
  // fourth-order centered differences of the periodic displacement
  const double h = grid_spacing();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  const auto d4 = [h](const Vec2& m2, const Vec2& m1, const Vec2& p1, const Vec2& p2) {
    return Vec2{(m2.x - p2.x + 8.0 * (p1.x - m1.x)) / (12.0 * h),
                (m2.y - p2.y + 8.0 * (p1.y - m1.y)) / (12.0 * h)};
  };
  for (int i = 0; i < m_; ++i)
    for (int j = 0; j < m_; ++j) {
      const auto wrap = [this](int k) { return (k % m_ + m_) % m_; };
      const Vec2 dx = d4(displacement_[index(wrap(i - 2), j)], displacement_[index(wrap(i - 1), j)],
                         displacement_[index(wrap(i + 1), j)], displacement_[index(wrap(i + 2), j)]);
      const Vec2 dy = d4(displacement_[index(i, wrap(j - 2))], displacement_[index(i, wrap(j - 1))],
                         displacement_[index(i, wrap(j + 1))], displacement_[index(i, wrap(j + 2))]);
      const double det = (1.0 + dx.x) * (1.0 + dy.y) - dy.x * dx.y;
      lo = std::min(lo, det);
      hi = std::max(hi, det);
    }
  return {lo, hi};
}

double FlowMap::max_volume_defect() const {
  const auto [lo, hi] = jacobian_range();
  return std::max(std::abs(lo - 1.0), std::abs(hi - 1.0));
}

namespace {

struct StageFields {
  SpectralField a, mid, b;
};

// One fourth-order step of every particle over [t, t + h] (h may be
// negative); the three stage fields are shared across particles.
void rk4_step_all(std::vector<Vec2>& positions, const StageFields& s, double h) {
  const VelocityEvaluator ua(s.a), um(s.mid), ub(s.b);
  for (auto& p : positions) {
    const Vec2 k1 = ua(p);
    const Vec2 k2 = um({p.x + 0.5 * h * k1.x, p.y + 0.5 * h * k1.y});
    const Vec2 k3 = um({p.x + 0.5 * h * k2.x, p.y + 0.5 * h * k2.y});
    const Vec2 k4 = ub({p.x + h * k3.x, p.y + h * k3.y});
    p.x += h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
    p.y += h / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y);
  }
}

void integrate_particles(std::vector<Vec2>& positions, const VelocityPath& path, double t0,
                         double t1, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("flow integration: dt must be > 0");
  if (t0 == t1) return;
  const double direction = t1 > t0 ? 1.0 : -1.0;
  const double h = direction * dt;
  const auto n_steps = static_cast<std::size_t>(std::llround(std::abs(t1 - t0) / dt));
  if (n_steps == 0) throw std::invalid_argument("flow integration: interval shorter than dt");

  for (std::size_t m = 0; m < n_steps; ++m) {
    const double t = t0 + static_cast<double>(m) * h;
    const double t_next = (m + 1 == n_steps) ? t1 : t + h;
    const double hm = t_next - t;
    const StageFields s{path.at_time(t), path.at_time(t + 0.5 * hm), path.at_time(t_next)};
    rk4_step_all(positions, s, hm);
  }
}

}  // namespace

FlowMap advance_flow(const FlowMap& start, const VelocityPath& path, double t0, double t1,
                     double dt) {
  const int m = start.grid_resolution();
  std::vector<Vec2> pos(static_cast<std::size_t>(m) * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) pos[start.index(i, j)] = start.position(i, j);

  integrate_particles(pos, path, t0, t1, dt);

  FlowMap out = FlowMap::identity(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const Vec2 g = out.grid_point(i, j);
      const Vec2& p = pos[out.index(i, j)];
      out.set_displacement(i, j, {p.x - g.x, p.y - g.y});
    }
  return out;
}

FlowMap invert_flow(const VelocityPath& path, double t, int grid_resolution, double dt) {
  FlowMap id = FlowMap::identity(grid_resolution);
  return advance_flow(id, path, t, 0.0, dt);
}

double composition_residual(const VelocityPath& path, const FlowMap& inverse, double t,
                            double dt) {
  const int m = inverse.grid_resolution();
  std::vector<Vec2> labels(static_cast<std::size_t>(m) * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) labels[inverse.index(i, j)] = inverse.position(i, j);

  integrate_particles(labels, path, 0.0, t, dt);

  double worst = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const Vec2 x = inverse.grid_point(i, j);
      const Vec2& y = labels[inverse.index(i, j)];
      const double dx = angle_difference(y.x, x.x);
      const double dy = angle_difference(y.y, x.y);
      worst = std::max(worst, std::sqrt(dx * dx + dy * dy));
    }
  return worst;
}

LagrangianState make_lagrangian_state(const FlowMap& flow, const SpectralField& u_t, double t) {
  LagrangianState s;
  s.flow = flow;
  s.time = t;
  const int m = flow.grid_resolution();
  s.eta.resize(static_cast<std::size_t>(m) * m);
  const VelocityEvaluator eval(u_t);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) s.eta[flow.index(i, j)] = eval(flow.position(i, j));
  return s;
}

Vec2 bilinear_sample(const std::vector<Vec2>& grid_fn, int m, const Vec2& label) {
  const double h = kTwoPi / m;
  // queries landing on a node (up to rounding) use it exactly
  const auto cell = [m](double f) {
    const double r = std::round(f);
    const double snapped = std::abs(f - r) < 1e-9 ? r : f;
    const double fl = std::floor(snapped);
    return std::pair<int, double>{static_cast<int>(fl) % m, snapped - fl};
  };
  const auto [i0, wx] = cell(wrap_angle(label.x) / h);
  const auto [j0, wy] = cell(wrap_angle(label.y) / h);
  const int i1 = (i0 + 1) % m;
  const int j1 = (j0 + 1) % m;

  const auto at = [&](int i, int j) -> const Vec2& {
    return grid_fn[static_cast<std::size_t>(i) * m + j];
  };
  const Vec2& f00 = at(i0, j0);
  const Vec2& f01 = at(i0, j1);
  const Vec2& f10 = at(i1, j0);
  const Vec2& f11 = at(i1, j1);
  return {(1 - wx) * ((1 - wy) * f00.x + wy * f01.x) + wx * ((1 - wy) * f10.x + wy * f11.x),
          (1 - wx) * ((1 - wy) * f00.y + wy * f01.y) + wx * ((1 - wy) * f10.y + wy * f11.y)};
}

ReconstructionReport reconstruct_velocity(const LagrangianState& state, const FlowMap& inverse,
                                          const VelocityPath& path, double dt) {
  if (inverse.grid_resolution() != state.flow.grid_resolution())
    throw std::invalid_argument("reconstruct_velocity: grid mismatch");
  const int m = state.flow.grid_resolution();
  const SpectralField u_t = path.at_time(state.time);
  const VelocityEvaluator eval(u_t);

  ReconstructionReport rep;
  rep.reconstructed.resize(static_cast<std::size_t>(m) * m);

  // Interpolated variant: eta over the label grid, queried at Phi^{-1}(x).
  double num = 0.0, den = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const Vec2 label = inverse.position(i, j);
      const Vec2 rec = bilinear_sample(state.eta, m, label);
      rep.reconstructed[state.flow.index(i, j)] = rec;
      const Vec2 ref = eval(state.flow.grid_point(i, j));
      num += (rec.x - ref.x) * (rec.x - ref.x) + (rec.y - ref.y) * (rec.y - ref.y);
      den += ref.x * ref.x + ref.y * ref.y;
    }
  rep.interpolated_mismatch = std::sqrt(num / std::max(den, 1e-300));

  // Direct variant: labels pushed forward again through the flow, so the
  // only error sources are the two particle integrations.
  std::vector<Vec2> labels(static_cast<std::size_t>(m) * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) labels[inverse.index(i, j)] = inverse.position(i, j);
  integrate_particles(labels, path, 0.0, state.time, dt);

  num = 0.0;
  den = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const Vec2 rec = eval(labels[inverse.index(i, j)]);
      const Vec2 ref = eval(inverse.grid_point(i, j));
      num += (rec.x - ref.x) * (rec.x - ref.x) + (rec.y - ref.y) * (rec.y - ref.y);
      den += ref.x * ref.x + ref.y * ref.y;
    }
  rep.direct_mismatch = std::sqrt(num / std::max(den, 1e-300));
  return rep;
}

VolumePreservingMap translation_map(int grid_resolution, int shift_cells) {
  const double a = kTwoPi * shift_cells / grid_resolution;
  VolumePreservingMap v;
  v.name = "translation";
  v.apply = [a](const Vec2& p) { return Vec2{p.x + a, p.y}; };
  v.det_defect = [](const Vec2&) { return 0.0; };
  v.grid_aligned = true;
  return v;
}

VolumePreservingMap shear_map(double amplitude) {
  VolumePreservingMap v;
  v.name = "shear";
  v.apply = [amplitude](const Vec2& p) { return Vec2{p.x + amplitude * std::sin(p.y), p.y}; };
  v.det_defect = [](const Vec2&) { return 0.0; };
  v.grid_aligned = false;
  return v;
}

VolumePreservingMap identity_map() {
  VolumePreservingMap v;
  v.name = "identity";
  v.apply = [](const Vec2& p) { return p; };
  v.det_defect = [](const Vec2&) { return 0.0; };
  v.grid_aligned = true;
  return v;
}

InvarianceReport right_invariance_check(const VelocityPath& path, const VolumePreservingMap& phi,
                                        const std::vector<double>& checkpoints_in,
                                        int grid_resolution, double dt) {
  std::vector<double> checkpoints = checkpoints_in;
  std::sort(checkpoints.begin(), checkpoints.end());
  const int m = grid_resolution;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const double defect = std::abs(phi.det_defect(Vec2{kTwoPi * i / m, kTwoPi * j / m}));
      if (defect > 1e-12)
        throw std::invalid_argument("right_invariance_check: map is not volume-preserving");
    }

  FlowMap plain = FlowMap::identity(m);
  FlowMap relabelled = FlowMap::from_map(m, phi.apply);

  InvarianceReport rep;
  double t_prev = 0.0;
  for (double t : checkpoints) {
    if (t > t_prev) {
      plain = advance_flow(plain, path, t_prev, t, dt);
      relabelled = advance_flow(relabelled, path, t_prev, t, dt);
      t_prev = t;
    }
    const SpectralField u_t = path.at_time(t);
    const LagrangianState sa = make_lagrangian_state(plain, u_t, t);
    const LagrangianState sb = make_lagrangian_state(relabelled, u_t, t);

    double worst = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        const Vec2 label = phi.apply(Vec2{kTwoPi * i / m, kTwoPi * j / m});
        const Vec2 a = bilinear_sample(sa.eta, m, label);
        const Vec2& b = sb.eta[sb.flow.index(i, j)];
        worst = std::max({worst, std::abs(a.x - b.x), std::abs(a.y - b.y)});
      }
    rep.checkpoint_times.push_back(t);
    rep.deviation.push_back(worst);
    rep.max_deviation = std::max(rep.max_deviation, worst);
  }
  return rep;
}

}  // namespace torusflow
