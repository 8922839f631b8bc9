#include "gatebath/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>

namespace gatebath {

namespace {

constexpr double kTimeTol = 1e-12;

// Decoupled-limit equilibrium used when lambda2 = 0 leaves the fixed point
// undetermined by the generator.
Vec3 gibbs_state(const ModelSpec& m, double temperature) {
  const double nz =
      temperature > 0.0 ? std::tanh(0.5 * m.delta / temperature) : 1.0;
  return Vec3(0.0, 0.0, nz);
}

// Full Schrodinger-picture generator inside the drive window.
Mat4 window_generator(const ModelSpec& m, const Bath& b, const PulseSpec& p,
                      double t) {
  const double u = t - p.tau_p1;
  const double eps = pulse_amplitude(p, t);
  const Mat2 h = -0.5 * m.delta * ops::sigma_z() +
                 0.5 * eps * (std::cos(m.delta * u) * ops::sigma_x() -
                              std::sin(m.delta * u) * ops::sigma_y());
  const Mat2 lam = p.shaped() ? lambda_general_pulse(m, b, p, t)
                              : lambda_in_gate(m, b, p, t);
  return ops::bloch_basis_transform(ops::hamiltonian_superop(h)) +
         dissipative_generator(lam, ops::coupling_operator(m.xi, m.phi));
}

struct Segment {
  double t0, t1;
  std::function<Mat4(double)> gen;
};

void rk4_step(Vec4& v, double t0, double h,
              const std::function<Mat4(double)>& gen) {
  const Vec4 k1 = gen(t0) * v;
  const Mat4 gm = gen(t0 + 0.5 * h);
  const Vec4 k2 = gm * (v + 0.5 * h * k1);
  const Vec4 k3 = gm * (v + 0.5 * h * k2);
  const Vec4 k4 = gen(t0 + h) * (v + h * k3);
  v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

void SimConfig::validate() const {
  model.validate();
  bath.validate();
  pulse.validate();
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw std::invalid_argument("SimConfig: dt must be positive");
  double cap = 0.02 * 2.0 * pi / model.delta;
  if (std::isfinite(pulse.omega_p))
    cap = std::min(cap, 0.02 * 2.0 * pi / std::abs(pulse.omega_p));
  if (dt > cap * (1.0 + 1e-12))
    throw std::invalid_argument("SimConfig: dt too large for delta/omega_p");
  if (!std::isfinite(t_end) || t_end <= 0.0)
    throw std::invalid_argument("SimConfig: t_end must be positive");
  if (t_end < pulse.tau_p2)
    throw std::invalid_argument("SimConfig: t_end must reach tau_p2");
  if (record_stride < 1)
    throw std::invalid_argument("SimConfig: record_stride must be >= 1");
}

Vec3 asymptotic_state(const ModelSpec& m, const Bath& b) {
  m.validate();
  const Mat4 g =
      free_generator(m.delta) +
      dissipative_generator(lambda_markov(m, b),
                            ops::coupling_operator(m.xi, m.phi));
  Eigen::FullPivLU<Mat4> lu(g);
  lu.setThreshold(1e-11);
  if (lu.dimensionOfKernel() != 1)
    throw std::runtime_error("asymptotic_state: degenerate null space");
  const Vec4 v = lu.kernel().col(0);
  if (std::abs(v(0)) < 1e-9 * v.norm())
    throw std::runtime_error("asymptotic_state: traceless null vector");
  return v.tail<3>() / v(0);
}

Trajectory integrate(const SimConfig& cfg, const Bath& b, RunKind kind) {
  cfg.validate();
  const ModelSpec& m = cfg.model;
  const PulseSpec& p = cfg.pulse;
  const Mat2 a = ops::coupling_operator(m.xi, m.phi);
  const bool instant = p.instantaneous();
  if (kind != RunKind::GatePlan && (!instant || p.tau_p1 != 0.0))
    throw std::invalid_argument(
        "integrate: factorized/Markov/coarse-grained runs need an "
        "instantaneous pulse at t = 0");

  const Mat4 g_markov =
      free_generator(m.delta) +
      dissipative_generator(lambda_markov(m, b), a);
  const Mat4 g_free = free_generator(m.delta);
  const bool interaction_native = kind == RunKind::CoarseGrained;

  std::vector<Segment> segs;
  switch (kind) {
    case RunKind::GatePlan: {
      if (p.tau_p1 > 0.0)
        segs.push_back({0.0, p.tau_p1, [&](double) { return g_markov; }});
      if (!instant)
        segs.push_back({p.tau_p1, p.tau_p2, [&](double t) {
                          return window_generator(m, b, p, t);
                        }});
      if (cfg.t_end > p.tau_p2) {
        if (p.shaped())
          segs.push_back({p.tau_p2, cfg.t_end, [&](double t) {
                            return Mat4(g_free +
                                        dissipative_generator(
                                            lambda_general_pulse(m, b, p, t),
                                            a));
                          }});
        else
          segs.push_back({p.tau_p2, cfg.t_end, [&](double t) {
                            return Mat4(g_free +
                                        dissipative_generator(
                                            lambda_post_gate(m, b, p, t), a));
                          }});
      }
      break;
    }
    case RunKind::Factorized:
      segs.push_back({0.0, cfg.t_end, [&](double t) {
                        return Mat4(g_free + dissipative_generator(
                                                 lambda_static(m, b, t), a));
                      }});
      break;
    case RunKind::Markov:
      segs.push_back({0.0, cfg.t_end, [&](double) { return g_markov; }});
      break;
    case RunKind::CoarseGrained:
      segs.push_back({0.0, cfg.t_end, [&](double t) {
                        const auto [pre, post] =
                            coarse_grained_generators(m, b, p, t);
                        return Mat4(pre + post);
                      }});
      break;
  }

  Vec3 n0 = b.spec().lambda2 == 0.0 ? gibbs_state(m, b.spec().temperature)
                                    : asymptotic_state(m, b);
  const Mat3 r_gate = ops::bloch_rotation(ops::gate_unitary(p.theta));
  const bool jump_at_zero = instant && p.tau_p1 == 0.0;
  if (jump_at_zero || kind != RunKind::GatePlan) n0 = r_gate * n0;

  Vec4 v = (Vec4() << 1.0, n0(0), n0(1), n0(2)).finished();
  Trajectory traj;
  const std::size_t expect =
      static_cast<std::size_t>(cfg.t_end / cfg.dt / cfg.record_stride) + 8;
  traj.times.reserve(expect);
  traj.bloch.reserve(expect);
  traj.eps_min.reserve(expect);

  auto record = [&](double t, const Vec4& state) {
    if (!traj.times.empty() && t <= traj.times.back() + kTimeTol) return;
    const Vec3 n = state.tail<3>();
    Vec3 out = n;
    if (interaction_native && cfg.frame == Frame::Schrodinger)
      out = ops::bloch_rotation(ops::free_propagator(m.delta, t)) * n;
    else if (!interaction_native && cfg.frame == Frame::Interaction)
      out = ops::bloch_rotation(ops::free_propagator(m.delta, -t)) * n;
    traj.times.push_back(t);
    traj.bloch.push_back(out);
    traj.eps_min.push_back(0.5 * (1.0 - n.norm()));
  };

  record(0.0, v);
  long step_count = 0;
  for (const Segment& seg : segs) {
    if (seg.t1 - seg.t0 <= kTimeTol) continue;
    long k = 0;
    double t = seg.t0;
    while (seg.t1 - t > kTimeTol) {
      const double t_next = std::min(seg.t0 + (k + 1) * cfg.dt, seg.t1);
      rk4_step(v, t, t_next - t, seg.gen);
      t = t_next;
      ++k;
      if (++step_count % cfg.record_stride == 0) record(t, v);
    }
    // instantaneous rotation between the equilibration and post-gate phases
    if (kind == RunKind::GatePlan && instant && p.tau_p1 > 0.0 &&
        std::abs(t - p.tau_p1) <= kTimeTol)
      v.tail<3>() = r_gate * v.tail<3>();
  }
  record(cfg.t_end, v);
  return traj;
}

Trajectory integrate(const SimConfig& cfg, RunKind kind) {
  cfg.validate();
  const Bath b(cfg.bath, cfg.t_end + 1.0);
  return integrate(cfg, b, kind);
}

double convergence_gap(const SimConfig& cfg, RunKind kind) {
  SimConfig half = cfg;
  half.dt = 0.5 * cfg.dt;
  half.record_stride = 2 * cfg.record_stride;
  const Bath b(cfg.bath, cfg.t_end + 1.0);
  const Trajectory coarse = integrate(cfg, b, kind);
  const Trajectory fine = integrate(half, b, kind);
  std::map<long long, Vec3> lookup;
  for (std::size_t i = 0; i < fine.size(); ++i)
    lookup.emplace(std::llround(fine.times[i] * 1e9), fine.bloch[i]);
  double gap = 0.0;
  std::size_t shared = 0;
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    const auto it = lookup.find(std::llround(coarse.times[i] * 1e9));
    if (it == lookup.end()) continue;
    ++shared;
    gap = std::max(gap, (coarse.bloch[i] - it->second).cwiseAbs().maxCoeff());
  }
  if (shared < 2)
    throw std::runtime_error("convergence_gap: no shared recording times");
  return gap;
}

PositivityReport positivity_audit(const Trajectory& traj) {
  if (traj.size() == 0)
    throw std::invalid_argument("positivity_audit: empty trajectory");
  PositivityReport rep;
  rep.min_eps = traj.eps_min[0];
  rep.argmin_time = traj.times[0];
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (traj.eps_min[i] < rep.min_eps) {
      rep.min_eps = traj.eps_min[i];
      rep.argmin_time = traj.times[i];
    }
    if (traj.eps_min[i] < 0.0 && !rep.first_negative_time)
      rep.first_negative_time = traj.times[i];
  }
  rep.pass = rep.min_eps >= -0.02;
  return rep;
}

LineFit fit_sz_line(const Trajectory& traj, double t0, double t1) {
  double st = 0, ss = 0, stt = 0, sts = 0;
  long n = 0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double t = traj.times[i];
    if (t < t0 - kTimeTol || t > t1 + kTimeTol) continue;
    const double s = 0.5 * traj.bloch[i](2);
    st += t;
    ss += s;
    stt += t * t;
    sts += t * s;
    ++n;
  }
  if (n < 2)
    throw std::invalid_argument("fit_sz_line: fit window outside trajectory");
  const double det = n * stt - st * st;
  if (std::abs(det) < 1e-30)
    throw std::invalid_argument("fit_sz_line: degenerate time window");
  LineFit f;
  f.slope = (n * sts - st * ss) / det;
  f.intercept = (ss * stt - st * sts) / det;
  return f;
}

double relaxation_delay(const Trajectory& traj, const ModelSpec& m,
                        const Bath& b, double gate_time, double fit_t0,
                        double fit_t1) {
  if (traj.size() == 0)
    throw std::invalid_argument("relaxation_delay: empty trajectory");
  // anchor: recorded state nearest the gate time
  std::size_t ig = 0;
  for (std::size_t i = 1; i < traj.size(); ++i)
    if (std::abs(traj.times[i] - gate_time) <
        std::abs(traj.times[ig] - gate_time))
      ig = i;
  const double tg = traj.times[ig];
  const double nzg = traj.bloch[ig](2);

  // Markovian reference: the longitudinal component decouples for the xi = 0
  // flip protocol, nz' = g30 + g33 nz, giving an explicit exponential.
  const Mat4 gm = free_generator(m.delta) +
                  dissipative_generator(lambda_markov(m, b),
                                        ops::coupling_operator(m.xi, m.phi));
  if (std::abs(gm(3, 3)) < 1e-14)
    throw std::runtime_error("relaxation_delay: vanishing Markov rate");
  const double nz_inf = -gm(3, 0) / gm(3, 3);

  // least-squares line through the reference <s_z> sampled at the same times
  Trajectory ref;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double t = traj.times[i];
    if (t < fit_t0 - kTimeTol || t > fit_t1 + kTimeTol) continue;
    ref.times.push_back(t);
    Vec3 nref = Vec3::Zero();
    nref(2) = nz_inf + (nzg - nz_inf) * std::exp(gm(3, 3) * (t - tg));
    ref.bloch.push_back(nref);
    ref.eps_min.push_back(0.0);
  }
  const LineFit lref = fit_sz_line(ref, fit_t0, fit_t1);
  const LineFit lfit = fit_sz_line(traj, fit_t0, fit_t1);
  if (std::abs(lref.slope) < 1e-14)
    throw std::runtime_error("relaxation_delay: flat reference line");
  const double tc = 0.5 * (fit_t0 + fit_t1);
  const double ref_at = lref.intercept + lref.slope * tc;
  const double fit_at = lfit.intercept + lfit.slope * tc;
  return (ref_at - fit_at) / lref.slope;
}

}  // namespace gatebath
