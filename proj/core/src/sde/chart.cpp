#include "torusflow/sde/chart.hpp"

#include <cmath>
#include <stdexcept>

namespace torusflow::sde {

namespace {

// sign = +1: projection from the north pole (0,0,1), psi = (x, y) / (1 - z);
// sign = -1: from the south pole, psi = (x, y) / (1 + z).
Chart stereographic(double pole_sign, double domain_radius, const std::string& name) {
  Chart c;
  c.name = name;
  c.domain_radius = domain_radius;
  const double s = pole_sign;

  c.to_chart = [s](const Vec& p) {
    const double w = 1.0 - s * p[2];
    return Vec{p[0] / w, p[1] / w};
  };
  c.from_chart = [s](const Vec& y) {
    const double r2 = y[0] * y[0] + y[1] * y[1];
    const double d = r2 + 1.0;
    return Vec{2.0 * y[0] / d, 2.0 * y[1] / d, s * (r2 - 1.0) / d};
  };
  c.jacobian = [s](const Vec& p) {
    const double w = 1.0 - s * p[2];
    Mat j(2, 3);
    j(0, 0) = 1.0 / w;
    j(0, 2) = s * p[0] / (w * w);
    j(1, 1) = 1.0 / w;
    j(1, 2) = s * p[1] / (w * w);
    return j;
  };
  c.hessian_action = [s](const Vec& p, const Vec& v) {
    const double w = 1.0 - s * p[2];
    const double w2 = w * w;
    const double w3 = w2 * w;
    Mat hm(2, 3);
    hm(0, 0) = s * v[2] / w2;
    hm(0, 2) = s * v[0] / w2 + 2.0 * p[0] * v[2] / w3;
    hm(1, 1) = s * v[2] / w2;
    hm(1, 2) = s * v[1] / w2 + 2.0 * p[1] * v[2] / w3;
    return hm;
  };
  c.inverse_jacobian = [s](const Vec& y) {
    const double r2 = y[0] * y[0] + y[1] * y[1];
    const double d = r2 + 1.0;
    const double d2 = d * d;
    Mat j(3, 2);
    j(0, 0) = 2.0 * (d - 2.0 * y[0] * y[0]) / d2;
    j(0, 1) = -4.0 * y[0] * y[1] / d2;
    j(1, 0) = -4.0 * y[0] * y[1] / d2;
    j(1, 1) = 2.0 * (d - 2.0 * y[1] * y[1]) / d2;
    j(2, 0) = s * 4.0 * y[0] / d2;
    j(2, 1) = s * 4.0 * y[1] / d2;
    return j;
  };
  return c;
}

}  // namespace

Chart stereographic_north(double domain_radius) {
  return stereographic(1.0, domain_radius, "stereo-north");
}

Chart stereographic_south(double domain_radius) {
  return stereographic(-1.0, domain_radius, "stereo-south");
}

SdeProblem push_forward(const SdeProblem& embedded, const Chart& chart) {
  if (embedded.ito_form)
    throw std::invalid_argument("push_forward: chart transport needs the Stratonovich form");

  SdeProblem p;
  p.name = embedded.name + "@" + chart.name;
  p.state_dim = 2;
  p.noise_dim = embedded.noise_dim;

  p.drift = [embedded, chart](const Vec& y) {
    const Vec q = chart.from_chart(y);
    return matvec(chart.jacobian(q), embedded.drift(q));
  };
  p.diffusion = [embedded, chart](const Vec& y) {
    const Vec q = chart.from_chart(y);
    return matmul(chart.jacobian(q), embedded.diffusion(q));
  };
  p.diffusion_derivative = [embedded, chart](const Vec& y, const Vec& h) {
    const Vec q = chart.from_chart(y);
    const Vec v = matvec(chart.inverse_jacobian(y), h);
    Mat out = matmul(chart.hessian_action(q, v), embedded.diffusion(q));
    const Mat second = matmul(chart.jacobian(q), embedded.diffusion_derivative(q, v));
    for (std::size_t i = 0; i < out.a.size(); ++i) out.a[i] += second.a[i];
    return out;
  };
  if (embedded.drift_jacobian) {
    p.drift_jacobian = [embedded, chart](const Vec& y) {
      const Vec q = chart.from_chart(y);
      const Mat inv = chart.inverse_jacobian(y);
      const Vec b = embedded.drift(q);
      const Mat db = embedded.drift_jacobian(q);
      Mat out(2, 2);
      for (int col = 0; col < 2; ++col) {
        Vec h(2, 0.0);
        h[static_cast<std::size_t>(col)] = 1.0;
        const Vec v = matvec(inv, h);
        Vec r = matvec(chart.hessian_action(q, v), b);
        const Vec r2 = matvec(chart.jacobian(q), matvec(db, v));
        for (int row = 0; row < 2; ++row) out(row, col) = r[row] + r2[row];
      }
      return out;
    };
  }
  const double radius = chart.domain_radius;
  p.boundary_distance = [radius](const Vec& y) { return radius - norm(y); };
  return p;
}

ChartComparison chart_consistency(const SdeProblem& embedded, const Chart& chart, const Vec& x0,
                                  const NoiseRecord& noise, int level, std::size_t n_steps) {
  const SdeProblem in_chart = push_forward(embedded, chart);
  SolveOptions opts;
  opts.project = false;  // both sides run the bare scheme
  opts.noise_level = level;

  const double dt = noise.dt(level);
  Vec x = x0;
  Vec y = chart.to_chart(x0);

  ChartComparison cmp;
  for (std::size_t s = 0; s < n_steps; ++s) {
    const Vec db = noise.increment(level, s);
    x = sde_step(embedded, x, db, dt, false);
    y = sde_step(in_chart, y, db, dt, false);
    if (!chart.contains(y))
      throw std::runtime_error("chart_consistency: path left the chart ball before the horizon");
    const Vec d = chart.to_chart(x) - y;
    cmp.times.push_back(static_cast<double>(s + 1) * dt);
    cmp.deviation.push_back(norm(d));
    cmp.max_deviation = std::max(cmp.max_deviation, cmp.deviation.back());
  }
  return cmp;
}

GluedRun glue_charts(const SdeProblem& embedded, const Chart& chart_a, const Chart& chart_b,
                     const Vec& x0, const NoiseRecord& noise, int level, std::size_t n_steps,
                     double switch_radius, int start_chart) {
  const SdeProblem in_a = push_forward(embedded, chart_a);
  const SdeProblem in_b = push_forward(embedded, chart_b);
  const Chart* charts[2] = {&chart_a, &chart_b};
  const SdeProblem* probs[2] = {&in_a, &in_b};

  const double dt = noise.dt(level);
  int active = start_chart;
  Vec y = charts[active]->to_chart(x0);
  if (!charts[active]->contains(y))
    throw std::invalid_argument("glue_charts: start state outside the starting chart");
  Vec x_ref = x0;

  GluedRun run;
  run.times.push_back(0.0);
  run.chart_index.push_back(active);
  run.embedded_states.push_back(charts[active]->from_chart(y));

  for (std::size_t s = 0; s < n_steps; ++s) {
    const Vec db = noise.increment(level, s);
    y = sde_step(*probs[active], y, db, dt, false);
    x_ref = sde_step(embedded, x_ref, db, dt, false);

    if (norm(y) > switch_radius) {
      const Vec p = charts[active]->from_chart(y);
      const int other = 1 - active;
      const Vec y_other = charts[other]->to_chart(p);
      if (charts[other]->contains(y_other)) {
        active = other;
        y = y_other;
        ++run.switches;
      }
    }
    if (!charts[active]->contains(y))
      throw std::runtime_error("glue_charts: no chart of the cover contains the state");

    const Vec p = charts[active]->from_chart(y);
    run.times.push_back(static_cast<double>(s + 1) * dt);
    run.chart_index.push_back(active);
    run.embedded_states.push_back(p);
    run.max_deviation_vs_reference =
        std::max(run.max_deviation_vs_reference, norm(p - x_ref));
  }
  return run;
}

}  // namespace torusflow::sde
