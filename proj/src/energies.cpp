#include "tvjump/energies.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "tvjump/linalg2.hpp"

namespace tvjump {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

FidelitySpec FidelitySpec::power(double p, double weight) {
  FidelitySpec s{p, weight, p * weight};
  s.validate();
  return s;
}

void FidelitySpec::validate() const {
  if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("fidelity exponent p must be >= 1");
  if (!(weight > 0.0)) throw std::invalid_argument("fidelity weight must be positive");
  if (!(increase_constant > 0.0)) throw std::invalid_argument("fidelity increase constant must be positive");
}

double phi_value(const FidelitySpec& spec, double t) { return spec.weight * std::pow(std::abs(t), spec.p); }

std::vector<SamplePair> check_p_increasing(const FidelitySpec& spec, std::span<const SamplePair> samples) {
  std::vector<SamplePair> bad;
  for (const auto& s : samples) {
    const double ax = std::abs(s.x), ay = std::abs(s.y);
    const double lhs = phi_value(spec, s.x) - phi_value(spec, s.y);
    const double rhs = spec.increase_constant * (ax - ay) * std::pow(ax, spec.p - 1.0);
    if (lhs > rhs + 1e-12) bad.push_back(s);
  }
  return bad;
}

EnergyPsi huber_psi(double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("huber_psi: eta must be positive");
  EnergyPsi e;
  e.name = "huber";
  e.parameter = eta;
  const double knee = 1.0 / eta;
  e.value = [eta, knee](double t) { return t >= knee ? t - 0.5 / eta : 0.5 * eta * t * t; };
  e.subgradient = [eta, knee](double t) {
    const double g = t >= knee ? 1.0 : eta * t;
    return Interval{g, g};
  };
  e.conjugate = [eta](double s) { return s <= 1.0 ? 0.5 * s * s / eta : kInf; };
  e.asymptote = 1.0;
  e.threshold = knee;
  e.coco_bound = eta;
  e.slope_at_zero = 0.0;
  e.convex = true;
  e.psi_member = true;
  return e;
}

EnergyPsi linear_psi() {
  EnergyPsi e;
  e.name = "tv";
  e.value = [](double t) { return t; };
  e.subgradient = [](double t) { return t > 0.0 ? Interval{1.0, 1.0} : Interval{-1.0, 1.0}; };
  e.conjugate = [](double s) { return s <= 1.0 ? 0.0 : kInf; };
  e.asymptote = 1.0;
  e.slope_at_zero = 1.0;
  e.convex = true;
  return e;
}

EnergyPsi square_psi(double claimed_threshold, double claimed_bound) {
  EnergyPsi e;
  e.name = "square";
  e.value = [](double t) { return t * t; };
  e.subgradient = [](double t) { return Interval{2.0 * t, 2.0 * t}; };
  e.conjugate = [](double s) { return 0.25 * s * s; };
  e.asymptote = kInf;
  e.threshold = claimed_threshold;
  e.coco_bound = claimed_bound;
  e.convex = true;
  return e;
}

EnergyPsi concave_psi_example(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("concave_psi_example: eps must lie in (0,1)");
  EnergyPsi e;
  e.name = "concave";
  e.parameter = eps;
  e.value = [eps](double t) { return eps * t - std::expm1(-t); };
  e.subgradient = [eps](double t) {
    const double g = eps + std::exp(-t);
    return Interval{g, g};
  };
  e.asymptote = eps;
  e.slope_at_zero = 1.0 + eps;
  e.convex = false;
  return e;
}

EnergyPsi perona_malik_psi() {
  EnergyPsi e;
  e.name = "perona-malik";
  e.value = [](double t) { return std::log1p(t * t); };
  e.subgradient = [](double t) {
    const double g = 2.0 * t / (1.0 + t * t);
    return Interval{g, g};
  };
  e.asymptote = 0.0;
  e.slope_at_zero = 0.0;
  e.convex = false;
  return e;
}

std::vector<PsiSamplePair> check_psi_membership(const EnergyPsi& psi, std::span<const PsiSamplePair> samples) {
  if (!(psi.threshold > 0.0) || !(psi.coco_bound > 0.0))
    throw std::invalid_argument("check_psi_membership: psi must carry K_psi > 0 and C_psi > 0");
  std::vector<PsiSamplePair> bad;
  for (const auto& smp : samples) {
    const Interval zs = psi.subgradient(smp.s), zt = psi.subgradient(smp.t);
    const double diff = smp.t - smp.s;
    // the product is linear in each selection, so the worst case is at an endpoint
    double worst = -kInf;
    for (double a : {zt.lo, zt.hi})
      for (double b : {zs.lo, zs.hi}) worst = std::max(worst, (a - b) * diff);
    const double bound = std::min(smp.s, smp.t) >= psi.threshold ? 0.0 : psi.coco_bound * diff * diff;
    if (worst > bound + 1e-12) bad.push_back(smp);
  }
  return bad;
}

double tv_psi_value(const GridImage& u, const EnergyPsi& psi, double alpha, DiffStencil stencil) {
  const int blocks = stencil == DiffStencil::Forward ? 1 : 4;
  double sum = 0.0;
  for (int b = 0; b < blocks; ++b) {
    const VectorField g = grad_one_sided(u, b & 1, b & 2);
    for (std::size_t k = 0; k < g.size(); ++k) sum += psi.value(g.norm_at(k));
  }
  return alpha * sum * u.spacing() * u.spacing() / blocks;
}

EnergyPairGap energy_pair_gap(const EnergyPsi& psi, const Mat2& a, const Mat2& b, double c, double d,
                              const Vec2& v) {
  if (!(c > 0.0) || !(d > 0.0)) throw std::invalid_argument("energy_pair_gap: c and d must be positive");
  EnergyPairGap out;
  out.v_norm = v.norm();
  out.lhs = c * psi.value((a * v).norm()) + d * psi.value((b * v).norm()) - 2.0 * psi.value(out.v_norm);
  const Mat2 ca = c * a, db = d * b;
  out.g_tilde = sup_pair_excess(ca, db);
  out.g_tilde_upper = biestim_upper(ca, db);
  out.j_tilde = std::abs(c + d - 2.0);
  out.d_a = spectral_norm(a - Mat2::Identity());
  out.d_b = spectral_norm(b - Mat2::Identity());
  return out;
}

double perona_malik_bound(const Mat2& a, const Mat2& b, double c, double d, const Vec2& v) {
  const Mat2 m = c * c * a.transpose() * a + d * d * b.transpose() * b - 2.0 * Mat2::Identity();
  return spectral_norm(m) * v.norm();
}

RegulariserSpec RegulariserSpec::tv(double alpha) {
  RegulariserSpec r;
  r.kind = Kind::TV;
  r.alpha = alpha;
  r.psi = linear_psi();
  r.validate();
  return r;
}

RegulariserSpec RegulariserSpec::huber(double alpha, double eta) { return with_psi(alpha, huber_psi(eta)); }

RegulariserSpec RegulariserSpec::with_psi(double alpha, EnergyPsi psi) {
  RegulariserSpec r;
  r.kind = Kind::Psi;
  r.alpha = alpha;
  r.psi = std::move(psi);
  r.validate();
  return r;
}

const EnergyPsi& RegulariserSpec::energy() const {
  static const EnergyPsi linear = linear_psi();
  return kind == Kind::TV ? linear : psi;
}

double RegulariserSpec::singular_weight() const {
  return kind == Kind::TV ? alpha : alpha * psi.asymptote;
}

void RegulariserSpec::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("regulariser weight alpha must be positive");
  if (kind == Kind::Psi && (!psi.value || !psi.subgradient))
    throw std::invalid_argument("TV_psi regulariser needs an energy with value and subgradient");
}

double regulariser_value(const GridImage& u, const RegulariserSpec& reg) {
  if (reg.kind == RegulariserSpec::Kind::TV) return reg.alpha * total_variation(u, reg.stencil);
  return tv_psi_value(u, reg.psi, reg.alpha, reg.stencil);
}

nlohmann::json to_json(const FidelitySpec& fid, const RegulariserSpec& reg) {
  nlohmann::json r;
  if (reg.kind == RegulariserSpec::Kind::TV) {
    r = {{"kind", "tv"}, {"alpha", reg.alpha}};
  } else if (reg.psi.name == "huber") {
    r = {{"kind", "huber"}, {"eta", reg.psi.parameter}, {"alpha", reg.alpha}};
  } else {
    throw std::invalid_argument("to_json: energy '" + reg.psi.name + "' is not serialisable");
  }
  if (reg.stencil == DiffStencil::Symmetric) r["stencil"] = "symmetric";
  return {{"fidelity", {{"p", fid.p}, {"weight", fid.weight}}}, {"regulariser", r}};
}

std::pair<FidelitySpec, RegulariserSpec> specs_from_json(const nlohmann::json& j) {
  const auto& jf = j.at("fidelity");
  FidelitySpec fid = FidelitySpec::power(jf.value("p", 2.0), jf.value("weight", 1.0));
  if (jf.contains("increase_constant")) {
    fid.increase_constant = jf.at("increase_constant").get<double>();
    fid.validate();
  }
  const auto& jr = j.at("regulariser");
  const std::string kind = jr.value("kind", "tv");
  const double alpha = jr.value("alpha", 1.0);
  RegulariserSpec reg;
  if (kind == "tv") reg = RegulariserSpec::tv(alpha);
  else if (kind == "huber") reg = RegulariserSpec::huber(alpha, jr.at("eta").get<double>());
  else throw std::invalid_argument("specs_from_json: unknown regulariser kind '" + kind + "'");
  const std::string stencil = jr.value("stencil", "forward");
  if (stencil == "symmetric") reg.stencil = DiffStencil::Symmetric;
  else if (stencil != "forward") throw std::invalid_argument("specs_from_json: unknown stencil '" + stencil + "'");
  return {fid, reg};
}

}  // namespace tvjump
