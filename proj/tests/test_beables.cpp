#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "beablesim/beables.hpp"

using namespace beablesim;

namespace {

ScenarioConfig single_decay_cfg(double gamma = 1.0, double T = 30.0) {
  ScenarioConfig cfg;
  cfg.kind = ScenarioKind::SingleDecay;
  cfg.gamma = gamma;
  cfg.omega = 1.0e6;
  cfg.plane_time = T;
  return cfg;
}

ScenarioConfig two_site_cfg(double a2, double d, double T) {
  ScenarioConfig cfg;
  cfg.kind = ScenarioKind::TwoSite;
  cfg.gamma = 1.0;
  cfg.omega = 1.0e6;
  cfg.alpha = std::sqrt(a2);
  cfg.beta = std::sqrt(1.0 - a2);
  cfg.separation = d;
  cfg.plane_time = T;
  return cfg;
}

ScenarioConfig absorber_cfg(double b2, ScenarioKind kind, double T = 240.0) {
  ScenarioConfig cfg;
  cfg.kind = kind;
  cfg.gamma = 1.0;
  cfg.omega = 1.0e6;
  cfg.alpha = std::sqrt(1.0 - b2);
  cfg.beta = std::sqrt(b2);
  cfg.shell_radius = 200.0;
  cfg.shell_inner = 0.5;
  cfg.plane_time = T;
  return cfg;
}

DetectionRecord click_record(const Vec3& pos, double T) {
  DetectionRecord rec;
  DetectionEvent d;
  d.position = pos;
  d.plane_time = T;
  rec.detections.push_back(d);
  return rec;
}

void check_state_invariants(const BeableValue& v) {
  double wsum = 0.0;
  for (const auto& [label, w] : v.posterior_weights) {
    CHECK(w >= -1e-15);
    wsum += w;
  }
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-10));
  for (double o : v.occupancy) CHECK(o >= -1e-10);
  CHECK(v.trace() <= 1.0 + 1e-10);
}

}  // namespace

TEST_CASE("single decay: click pins the transition; excited before, ground from t0 on") {
  const Scenario scn = build_scenario(single_decay_cfg());
  const double t0 = 1.3;
  const DetectionRecord rec = click_record({0.0, scn.plane.T - t0, 0.0}, scn.plane.T);
  const LocalOperator op = LocalOperator::energy_excited(scn, "atom");

  for (double t : {0.0, 0.5, t0 - 1e-6}) {
    const BeableValue v = conditional_beable(Event{t, {}}, op, rec, scn);
    CHECK(v.expectation == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(v.trace() == doctest::Approx(1.0).epsilon(1e-10));
    check_state_invariants(v);
  }
  for (double t : {t0, t0 + 1e-6, 5.0}) {
    const BeableValue v = conditional_beable(Event{t, {}}, op, rec, scn);
    CHECK(v.expectation == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(v.occupancy[1] == doctest::Approx(1.0).epsilon(1e-12));  // ground
    check_state_invariants(v);
  }
}

TEST_CASE("single decay: no outside click means still excited") {
  const Scenario scn = build_scenario(single_decay_cfg());
  DetectionRecord empty;
  const LocalOperator op = LocalOperator::energy_excited(scn, "atom");
  for (double t : {0.0, 1.0, 5.0}) {
    const BeableValue v = conditional_beable(Event{t, {}}, op, empty, scn);
    CHECK(v.expectation == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("single decay marginal is the decaying mixed state") {
  const Scenario scn = build_scenario(single_decay_cfg());
  const LocalOperator op = LocalOperator::energy_excited(scn, "atom");
  for (double t : {0.0, 0.5, 1.0, 3.0}) {
    const BeableValue v = marginal_beable(Event{t, {}}, op, scn);
    CHECK(v.expectation == doctest::Approx(std::exp(-t)).epsilon(1e-12));
    CHECK(v.occupancy[1] == doctest::Approx(1.0 - std::exp(-t)).epsilon(1e-12));
    CHECK(v.trace() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("law of total expectation at moderate sample size") {
  const Scenario scn = build_scenario(single_decay_cfg());
  const LocalOperator op = LocalOperator::energy_excited(scn, "atom");
  const int n = 20000;
  for (double t : {0.5, 1.5}) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      RngStream rng(97, static_cast<std::uint64_t>(i));
      const TrialSample s = sample_record(scn, rng);
      acc += conditional_beable(Event{t, {}}, op, s.record, scn).expectation;
    }
    const double p = std::exp(-t);
    CHECK(std::abs(acc / n - p) < 3.0 * std::sqrt(p * (1.0 - p) / n));
  }
}

TEST_CASE("two-site: detected branch transitions, distant site empties at t'") {
  const double d = 2.0;
  const double T = 200.0;
  const Scenario scn = build_scenario(two_site_cfg(0.3, d, T));
  const Vec3 r_plus = scn.site("atom_plus").position;
  const Vec3 r_minus = scn.site("atom_minus").position;

  // A plus-branch click in the lower hemisphere (n_z < 0), where the
  // disjoint-support rule attributes it to the plus site.
  const double tau = 0.8;
  const Vec3 n = normalized(Vec3{0.6, 0.2, -0.77});
  const DetectionRecord rec = click_record(r_plus + (T - tau) * n, T);

  const LocalOperator op_plus = LocalOperator::energy_excited(scn, "atom_plus");
  const LocalOperator op_minus = LocalOperator::energy_excited(scn, "atom_minus");

  // Before the click leaves the cone of the plus site: near-prior weights.
  {
    const BeableValue v = conditional_beable(Event{0.1 * tau, r_plus}, op_plus, rec, scn);
    CHECK(v.expectation == doctest::Approx(0.7).epsilon(0.15));
    check_state_invariants(v);
  }
  // From tau on the click is outside the plus-site cone and pins the branch.
  for (double t : {tau, tau + 0.5, 3.0}) {
    const BeableValue v = conditional_beable(Event{t, r_plus}, op_plus, rec, scn);
    CHECK(v.expectation == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(v.posterior_weights.at("plus") == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(v.occupancy[1] == doctest::Approx(1.0).epsilon(1e-12));
  }

  // Distant site: the transition to an empty local state happens at the
  // exact correlated time t' = T - |click - r_minus| / c.
  const double t_prime = T - norm(rec.detections[0].position - r_minus);
  {
    const BeableValue before = conditional_beable(Event{t_prime - 0.01, r_minus}, op_minus, rec, scn);
    CHECK(before.trace() > 0.01);  // still carries the minus-branch weight
    const BeableValue after = conditional_beable(Event{t_prime + 0.01, r_minus}, op_minus, rec, scn);
    CHECK(after.trace() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(after.expectation == doctest::Approx(0.0).epsilon(1e-12));
  }

  // The asymptotic formula agrees with the step location to O(1/T).
  const auto tt = correlated_transition_time(tau, rec.detections[0], r_plus, r_minus, Frame{1.0});
  CHECK(tt.exact == doctest::Approx(t_prime).epsilon(1e-12));
  CHECK(std::abs(tt.exact - tt.asymptotic) < 5.0 * d * d / (2.0 * (T - tau)));
}

TEST_CASE("two-site before any information: prior weights at the symmetric midpoint") {
  // Viewed from the midpoint both no-click factors are equal by symmetry,
  // so the posterior reduces to the Born weights exactly.
  const Scenario scn = build_scenario(two_site_cfg(0.3, 40.0, 200.0));
  DetectionRecord empty;
  const LocalOperator op_minus = LocalOperator::energy_excited(scn, "atom_minus");
  const BeableValue v = conditional_beable(Event{0.0, {0.0, 0.0, 0.0}}, op_minus, empty, scn);
  CHECK(v.expectation == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(v.posterior_weights.at("minus") == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("causal locality: inside-cone clicks contribute nothing, bit-exactly") {
  const Scenario scn = build_scenario(single_decay_cfg());
  const LocalOperator op = LocalOperator::energy_excited(scn, "atom");
  const double T = scn.plane.T;

  for (int i = 0; i < 50; ++i) {
    RngStream rng(1001, static_cast<std::uint64_t>(i));
    const double t = 2.0 * rng.uniform();
    const Event x{t, {rng.uniform() - 0.5, rng.uniform() - 0.5, rng.uniform() - 0.5}};

    // A record whose single click is strictly inside the cone of x.
    const double inside_radius = 0.3 * (T - t);
    DetectionRecord rec = click_record(x.r + Vec3{inside_radius, 0.0, 0.0}, T);
    const BeableValue base = conditional_beable(x, op, rec, scn);

    // Move the click elsewhere inside, or drop it: identical posterior.
    DetectionRecord moved = click_record(x.r + Vec3{0.0, 0.9 * (T - t), 0.0}, T);
    DetectionRecord dropped;
    const BeableValue v_moved = conditional_beable(x, op, moved, scn);
    const BeableValue v_dropped = conditional_beable(x, op, dropped, scn);
    CHECK(v_moved.expectation == base.expectation);
    CHECK(v_dropped.expectation == base.expectation);
    for (const auto& [label, w] : base.posterior_weights) {
      CHECK(v_moved.posterior_weights.at(label) == w);
      CHECK(v_dropped.posterior_weights.at(label) == w);
    }
  }
}

TEST_CASE("trajectory evaluation and transition_time") {
  const Scenario scn = build_scenario(single_decay_cfg());
  const double t0 = 0.9;
  const DetectionRecord rec = click_record({scn.plane.T - t0, 0.0, 0.0}, scn.plane.T);
  const LocalOperator op = LocalOperator::energy_excited(scn, "atom");

  std::vector<double> grid;
  for (int i = 0; i < 200; ++i) grid.push_back(i * 0.01);
  const BeableTrajectory traj = beable_trajectory("atom", op, rec, scn, grid);

  const auto t_step = transition_time(traj);
  REQUIRE(t_step.has_value());
  // First grid point at or after t0.
  CHECK(*t_step == doctest::Approx(0.9).epsilon(1e-12));

  // All-excited trajectory: no crossing.
  DetectionRecord empty;
  const BeableTrajectory flat = beable_trajectory("atom", op, empty, scn, grid);
  CHECK_FALSE(transition_time(flat).has_value());

  // Non-projector operators are rejected.
  std::vector<std::complex<double>> h = {2.0, 0.0, 0.0, -1.0};
  const LocalOperator energy = LocalOperator::from_matrix(scn, "atom", h);
  const BeableTrajectory etraj = beable_trajectory("atom", energy, rec, scn, grid);
  CHECK_THROWS_AS((void)transition_time(etraj), std::invalid_argument);

  // Grid validation.
  CHECK_THROWS_AS((void)beable_trajectory("atom", op, rec, scn, std::vector<double>{-1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)beable_trajectory("atom", op, rec, scn, std::vector<double>{scn.plane.T}),
                  std::invalid_argument);
}

TEST_CASE("absorber: smooth crossover before any click becomes visible") {
  const Scenario scn = build_scenario(absorber_cfg(0.4, ScenarioKind::Absorber));
  DetectionRecord empty;
  const LocalOperator at_origin = LocalOperator::position_component(scn, "object_origin");

  for (double t : {0.5, 2.0, 6.0}) {
    const BeableValue v = conditional_beable(Event{t, {}}, at_origin, empty, scn);
    const double wa = 0.6;
    const double wb = 0.4 * std::exp(-t);
    CHECK(v.posterior_weights.at("absorbed") == doctest::Approx(wa / (wa + wb)).epsilon(1e-9));
    CHECK(v.posterior_weights.at("escape") == doctest::Approx(wb / (wa + wb)).epsilon(1e-9));
    CHECK(v.expectation == doctest::Approx(wa / (wa + wb)).epsilon(1e-9));
    check_state_invariants(v);
  }

  // Within the absorbed family the object crosses to the absorbed state one
  // shell flight time after the (unannounced) emission.
  const LocalOperator star = LocalOperator::basis_projector(scn, "object_origin", "obj0star");
  const double t = 4.0;
  const BeableValue v = conditional_beable(Event{t, {}}, star, empty, scn);
  const double wa = 0.6;
  const double wb = 0.4 * std::exp(-t);
  const double within = 1.0 - std::exp(-(t - scn.config.shell_inner));
  CHECK(v.expectation == doctest::Approx(wa / (wa + wb) * within).epsilon(1e-9));
}

TEST_CASE("absorber: escape click pins the object at the displaced position") {
  const Scenario scn = build_scenario(absorber_cfg(0.4, ScenarioKind::Absorber));
  const double tau = 1.1;
  const double r = scn.plane.T - tau;
  const DetectionRecord rec =
      click_record(Vec3{0.6 * r, 0.0, -0.8 * r}, scn.plane.T);
  const LocalOperator offset_occ = LocalOperator::position_component(scn, "object_offset");
  // Once the click is visible at the origin the escape branch is pinned.
  const BeableValue v = conditional_beable(Event{tau + 0.1, {}}, offset_occ, rec, scn);
  CHECK(v.posterior_weights.at("escape") == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(v.expectation == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("momentum records are rejected by the light-cone engine") {
  const Scenario scn = build_scenario(absorber_cfg(0.4, ScenarioKind::AbsorberMomentum));
  DetectionRecord rec;
  DetectionEvent d;
  d.kind = DetectionKind::Momentum;
  d.momentum = Vec3{0.0, 0.0, 1.0};
  d.plane_time = scn.plane.T;
  rec.detections.push_back(d);
  const LocalOperator op = LocalOperator::energy_excited(scn, "atom");
  CHECK_THROWS_AS((void)conditional_beable(Event{1.0, {}}, op, rec, scn), std::invalid_argument);
}

TEST_CASE("ABL beable: object pinned from t = 0, atom decays identically for both outcomes") {
  const Scenario scn = build_scenario(absorber_cfg(0.4, ScenarioKind::AbsorberMomentum));
  const LocalOperator at_origin = LocalOperator::position_component(scn, "object_origin");
  const LocalOperator at_offset = LocalOperator::position_component(scn, "object_offset");
  const LocalOperator atom_e = LocalOperator::energy_excited(scn, "atom");
  const LocalOperator atom_g = LocalOperator::energy_ground(scn, "atom");

  const std::optional<Vec3> photon = Vec3{0.0, 0.0, 1.0e6};
  const std::optional<Vec3> no_photon{};

  for (double t : {0.0, 0.3, 1.7, 10.0}) {
    // Photon outcome: object at the displaced position for all t >= 0.
    CHECK(abl_beable(Event{t, {}}, at_offset, photon, scn).expectation == 1.0);
    CHECK(abl_beable(Event{t, {}}, at_origin, photon, scn).expectation == 0.0);
    // Null outcome: object at the origin for all t >= 0.
    CHECK(abl_beable(Event{t, {}}, at_origin, no_photon, scn).expectation == 1.0);
    CHECK(abl_beable(Event{t, {}}, at_offset, no_photon, scn).expectation == 0.0);

    // Atom energy beable matches the decay law exactly, for either outcome.
    for (const auto& outcome : {photon, no_photon}) {
      const double pe = abl_beable(Event{t, {}}, atom_e, outcome, scn).expectation;
      const double pg = abl_beable(Event{t, {}}, atom_g, outcome, scn).expectation;
      CHECK(pe == doctest::Approx(std::exp(-t)).epsilon(1e-14));
      CHECK(pe + pg == doctest::Approx(1.0).epsilon(1e-14));
    }

    // Complete object projector set sums to 1.
    for (const auto& outcome : {photon, no_photon}) {
      const double total =
          abl_beable(Event{t, {}}, LocalOperator::basis_projector(scn, "object_origin", "obj0"),
                     outcome, scn)
              .expectation +
          abl_beable(Event{t, {}},
                     LocalOperator::basis_projector(scn, "object_origin", "obj0star"), outcome, scn)
              .expectation +
          abl_beable(Event{t, {}}, at_offset, outcome, scn).expectation;
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  // Impossible outcomes are reported.
  const Scenario all_alpha = build_scenario(absorber_cfg(0.0, ScenarioKind::AbsorberMomentum));
  CHECK_THROWS_AS((void)abl_beable(Event{1.0, {}}, at_offset, photon, all_alpha),
                  InconsistentRecordError);
}

TEST_CASE("grid detector with cutoff above the line: conditioning reduces to the marginal") {
  Scenario scn = build_scenario(single_decay_cfg());
  scn.plane.mode = PlaneMode::Grid;
  scn.plane.cell_size = 0.05;
  scn.plane.cutoff_freq = 2.0 * (scn.config.omega / (2.0 * 3.14159265358979));

  DetectionRecord empty;  // the photon is invisible, so records are empty
  const LocalOperator op = LocalOperator::energy_excited(scn, "atom");
  for (double t : {0.5, 1.0, 4.0}) {
    const BeableValue cond = conditional_beable(Event{t, {}}, op, empty, scn);
    const BeableValue marg = marginal_beable(Event{t, {}}, op, scn);
    CHECK(cond.expectation == doctest::Approx(marg.expectation).epsilon(1e-13));
  }
}

TEST_CASE("exact-posterior mode keeps both two-site families in play") {
  ScenarioConfig cfg = two_site_cfg(0.5, 2.0, 50.0);
  cfg.mode = ConditioningMode::ExactPosterior;
  const Scenario scn = build_scenario(cfg);
  const Vec3 r_plus = scn.site("atom_plus").position;

  const double tau = 0.7;
  const Vec3 n = normalized(Vec3{1.0, 0.0, -0.2});
  const DetectionRecord rec = click_record(r_plus + (scn.plane.T - tau) * n, scn.plane.T);

  const LocalOperator op = LocalOperator::energy_excited(scn, "atom_plus");
  const BeableValue v = conditional_beable(Event{5.0, r_plus}, op, rec, scn);
  // Both families keep weight proportional to their true click densities.
  CHECK(v.posterior_weights.at("plus") > 0.0);
  CHECK(v.posterior_weights.at("minus") > 0.0);
  CHECK(v.posterior_weights.at("plus") + v.posterior_weights.at("minus") ==
        doctest::Approx(1.0).epsilon(1e-12));

  // Paper mode zeroes the smaller-density family.
  const Scenario paper = build_scenario(two_site_cfg(0.5, 2.0, 50.0));
  const BeableValue vp = conditional_beable(Event{5.0, r_plus}, op, rec, paper);
  CHECK(vp.posterior_weights.at("minus") == 0.0);
}
