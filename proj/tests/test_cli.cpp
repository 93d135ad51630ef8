#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cipflow/errors.hpp"
#include "cipflow/experiment.hpp"

using namespace cipflow;

namespace {

std::string config_error(const std::string& text) {
  try {
    parse_config_text(text, "test.ini");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

RunConfig small_tg(int degree) {
  RunConfig cfg = parse_config_text("[case]\nname = taylor_green\n[discretization]\ndegree = " +
                                    std::to_string(degree) + "\n[time]\nfinal_time = 0.05\n");
  return cfg;
}

}  // namespace

TEST_CASE("minimal config gets the benchmark defaults") {
  const RunConfig cfg = parse_config_text("[case]\nname = taylor_green\n");
  CHECK(cfg.degree == 1);
  CHECK(cfg.scheme == Scheme::imex_cn);
  CHECK(cfg.convection == ConvectionMode::navier_stokes);
  CHECK(cfg.effective_levels() == std::vector<int>{10, 20, 40, 80});
  CHECK(cfg.effective_final_time() == 1.0);
  CHECK(cfg.effective_cfl_rule() == CflRule::hyperbolic);
  CHECK(cfg.effective_courant() == 0.05);
  CHECK(cfg.stride == 1);
  const PhysParams p = cfg.phys_params();
  CHECK(p.mu == 3.571e-6);
  CHECK(p.gamma_u == 0.001);
  CHECK(p.gamma_p == 0.001);
  CHECK(p.gamma == 10.0);
  CHECK(p.eps_perp == 0.01);
  CHECK(cfg.stepping(0.1).tau == doctest::Approx(0.005));
}

TEST_CASE("P2 config uses the four-thirds rule") {
  const RunConfig cfg = parse_config_text(
      "# second order\n[case]\nname = taylor_green\n\n[discretization]\ndegree = 2   # P2\n"
      "[time]\ncfl_rule = four_thirds\ncourant = 0.025\n");
  CHECK(cfg.phys_params().gamma == 40.0);
  for (int n : {10, 20, 40, 80}) {
    const double h = 1.0 / n;
    CHECK(cfg.stepping(h).tau == doctest::Approx(0.025 * std::pow(h, 4.0 / 3.0)).epsilon(1e-14));
  }
  CHECK(cfg.stepping(1.0 / 80).tau == doctest::Approx(7.252e-5).epsilon(1e-4));
  // Degree 2 without an explicit rule picks the same one.
  const RunConfig implicit_rule = parse_config_text("[discretization]\ndegree = 2\n");
  CHECK(implicit_rule.effective_cfl_rule() == CflRule::four_thirds);
  CHECK(implicit_rule.effective_courant() == 0.025);
}

TEST_CASE("explicit values override the defaults") {
  const RunConfig cfg = parse_config_text(
      "[case]\nname = low_re\nmu = 0.2\n[discretization]\nlevels = 6 12\ngamma_u = 0.01\ngamma = 7\n"
      "[time]\nscheme = split_viscous\ndirichlet = nitsche\ntau = 0.003\nfinal_time = 0.5\n"
      "explicit_viscosity = false\nblowup_factor = 100\n[output]\ndirectory = results\nstride = 5\n");
  CHECK(cfg.make_bench()->mu() == 0.2);
  CHECK(cfg.effective_levels() == std::vector<int>{6, 12});
  CHECK(cfg.phys_params().gamma_u == 0.01);
  CHECK(cfg.phys_params().gamma == 7.0);
  const SteppingConfig s = cfg.stepping(0.1);
  CHECK(s.scheme == Scheme::split_viscous);
  CHECK(s.dirichlet == DirichletMode::nitsche);
  CHECK(s.tau == 0.003);
  CHECK(s.final_time == 0.5);
  CHECK_FALSE(s.explicit_viscosity);
  CHECK(s.blowup_factor == 100.0);
  CHECK(cfg.output_directory == "results");
  CHECK(cfg.stride == 5);
}

TEST_CASE("parse errors name the line and the offending key") {
  std::string msg = config_error("[case]\nname = taylor_green\n[time]\nschem = imex_cn\n");
  CHECK(msg.find("test.ini:4") != std::string::npos);
  CHECK(msg.find("'schem'") != std::string::npos);

  msg = config_error("[cases]\n");
  CHECK(msg.find("test.ini:1") != std::string::npos);
  CHECK(msg.find("[cases]") != std::string::npos);

  CHECK(config_error("[time]\ncourant = 0.05\ncourant = 0.1\n").find(":3: duplicate") != std::string::npos);
  CHECK(config_error("[time]\ncourant = fast\n").find(":2: expected a number") != std::string::npos);
  CHECK(config_error("[time]\ncourant = 0.05x\n").find("expected a number") != std::string::npos);
  CHECK(config_error("[discretization]\ndegree = 1.5\n").find("expected an integer") != std::string::npos);
  CHECK(config_error("[time]\nscheme = rk4\n").find("split_inviscid") != std::string::npos);
  CHECK(config_error("[time]\nexplicit_viscosity = maybe\n").find("true or false") != std::string::npos);
  CHECK(config_error("degree = 2\n").find("outside any section") != std::string::npos);
  CHECK(config_error("[time]\njust words\n").find(":2: expected 'key = value'") != std::string::npos);
  CHECK(config_error("[time\n").find("malformed section") != std::string::npos);
  CHECK(config_error("[time]\ncourant =\n").find("missing value") != std::string::npos);
  CHECK(config_error("[discretization]\nlevels = 10 x\n").find("expected an integer") != std::string::npos);
}

TEST_CASE("inconsistent combinations are rejected") {
  CHECK(config_error("[time]\nscheme = split_inviscid\nexplicit_viscosity = false\n").find("explicit_viscosity") !=
        std::string::npos);
  CHECK_FALSE(config_error("[case]\nname = kelvin_helmholtz\n[time]\nconvection = oseen\n").empty());
  CHECK_FALSE(config_error("[case]\nname = couette\n").empty());
  CHECK_FALSE(config_error("[discretization]\ndegree = 3\n").empty());
  CHECK_FALSE(config_error("[case]\nmu = 0\n").empty());
  CHECK_FALSE(config_error("[discretization]\nlevels = 10 0\n").empty());
  CHECK_FALSE(config_error("[output]\nstride = 0\n").empty());
  CHECK_FALSE(config_error("[time]\ncourant = -1\n").empty());
  CHECK_FALSE(config_error("[discretization]\ngamma_p = -1\n").empty());
  CHECK_THROWS_AS(parse_config("/nonexistent/cipflow.ini"), ConfigError);
}

TEST_CASE("config file on disk") {
  const auto path = std::filesystem::temp_directory_path() / "cipflow_test_config.ini";
  {
    std::ofstream f(path);
    f << "[case]\nname = kelvin_helmholtz\n[discretization]\ndegree = 2\n";
  }
  const RunConfig cfg = parse_config(path);
  CHECK(cfg.case_name == "kelvin_helmholtz");
  CHECK(cfg.effective_levels() == std::vector<int>{40});
  CHECK(cfg.effective_final_time() == 10.0);
  std::filesystem::remove(path);
}

TEST_CASE("a run of a single step writes one row") {
  RunConfig cfg = small_tg(1);
  cfg.tau = 0.01;
  cfg.final_time = 0.01;
  std::ostringstream csv;
  const RunReport r = run_single(cfg, 4, &csv);
  const auto lines = lines_of(csv.str());
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == "t,ke,phys_diss,art_diss,err_u_l2,err_p_l2,err_u_h1");
  CHECK(r.rows_written == 1);
  CHECK(r.steps == 1);
  CHECK_FALSE(r.abort_message.has_value());
}

TEST_CASE("rows follow the stride and times increase") {
  RunConfig cfg = parse_config_text(
      "[case]\nname = kelvin_helmholtz\n[discretization]\ndegree = 1\n[time]\ntau = 0.01\nfinal_time = 0.1\n"
      "[output]\nstride = 3\n");
  std::ostringstream csv;
  const RunReport r = run_single(cfg, 6, &csv);
  const auto lines = lines_of(csv.str());
  CHECK(lines[0] == "t,ke,phys_diss,art_diss");
  // Steps 1, 3, 6, 9 and the last one, 10.
  REQUIRE(lines.size() == 6);
  double prev = -1.0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const double t = std::stod(lines[i].substr(0, lines[i].find(',')));
    CHECK(t > prev);
    prev = t;
  }
  CHECK(prev == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(r.max_velocity_norm >= r.reference_norm);
}

TEST_CASE("kinetic energy in the csv matches the state dump") {
  RunConfig cfg = small_tg(2);
  std::ostringstream csv, dump;
  const RunReport r = run_single(cfg, 4, &csv);
  write_state_dump(dump, *r.solver, r.final_state);

  std::istringstream in(dump.str());
  std::string word, name;
  int degree = 0, step = 0, nv = 0, nt = 0, nvel = 0, npres = 0;
  double time = 0.0;
  in >> word >> name;
  CHECK(word == "case");
  CHECK(name == "taylor_green");
  in >> word >> degree >> word >> step >> word >> time >> word >> nv >> nt;
  CHECK(degree == 2);
  CHECK(step == r.steps);
  CHECK(time == doctest::Approx(0.05).epsilon(1e-12));
  for (int i = 0; i < 2 * nv + 3 * nt; ++i) in >> word;

  // Rebuild the space independently and compare coordinates and energy.
  const auto bench = cfg.make_bench();
  const auto mesh = case_mesh(*bench, 4);
  CHECK(nv == mesh->num_vertices());
  CHECK(nt == mesh->num_triangles());
  const FeSpace vs = build_space(mesh, 2, 2);
  in >> word >> nvel;
  CHECK(word == "velocity");
  REQUIRE(nvel == vs.scalar_size());
  Vector u(vs.size());
  for (int d = 0; d < nvel; ++d) {
    double x = 0, y = 0;
    in >> x >> y >> u[vs.dof(d, 0)] >> u[vs.dof(d, 1)];
    CHECK((Vec2(x, y) - vs.dof_coords()[static_cast<std::size_t>(d)]).norm() < 1e-15);
  }
  in >> word >> npres;
  CHECK(word == "pressure");
  CHECK(npres == build_space(mesh, 2, 1).scalar_size());

  const double ke = 0.5 * u.dot(assemble_mass(vs) * u);
  const std::string last = lines_of(csv.str()).back();
  const std::string ke_field = last.substr(last.find(',') + 1, last.find(',', last.find(',') + 1) - last.find(',') - 1);
  CHECK(std::stod(ke_field) == doctest::Approx(ke).epsilon(1e-13));
}

TEST_CASE("blow-up ends the csv with an abort marker") {
  RunConfig cfg = small_tg(1);
  cfg.courant = 5.0;
  cfg.final_time = 1.0;
  std::ostringstream csv;
  const RunReport r = run_single(cfg, 20, &csv);
  REQUIRE(r.abort_message.has_value());
  const auto lines = lines_of(csv.str());
  CHECK(lines.back().rfind("# aborted: ", 0) == 0);
  CHECK(lines.back().find("Courant") != std::string::npos);
  CHECK(static_cast<int>(lines.size()) == r.rows_written + 2);
}

TEST_CASE("outputs are byte-identical across reruns") {
  RunConfig cfg = small_tg(2);
  std::ostringstream a, b;
  run_single(cfg, 4, &a);
  run_single(cfg, 4, &b);
  CHECK(a.str() == b.str());

  RunConfig sweep_cfg = small_tg(1);
  std::ostringstream s1, s2;
  write_sweep_csv(s1, run_convergence_sweep(sweep_cfg, {4, 8}));
  write_sweep_csv(s2, run_convergence_sweep(sweep_cfg, {4, 8}));
  CHECK(s1.str() == s2.str());
}

TEST_CASE("convergence sweep") {
  RunConfig cfg = parse_config_text("[case]\nname = taylor_green\n[time]\ndirichlet = strong_inflow\n");
  SUBCASE("two levels of P1 give second order") {
    const SweepResult r = run_convergence_sweep(cfg, {10, 20});
    REQUIRE(r.rows.size() == 2);
    CHECK(r.rows[0].h == doctest::Approx(0.1));
    CHECK(r.rows[1].tau == doctest::Approx(0.0025));
    CHECK(r.rate_u_l2[0] == doctest::Approx(2.0).epsilon(0.1));
    CHECK(r.rate_p_l2[0] == doctest::Approx(2.0).epsilon(0.1));
    CHECK(r.fit_u_l2 == doctest::Approx(r.rate_u_l2[0]).epsilon(1e-10));
    std::ostringstream out;
    write_sweep_csv(out, r);
    const auto lines = lines_of(out.str());
    REQUIRE(lines.size() == 5);
    CHECK(lines[0] == "n,h,tau,steps,err_u_l2,err_p_l2,err_u_h1");
    CHECK(lines[1].rfind("10,", 0) == 0);
    CHECK(lines[3].rfind("# rate,10,20,", 0) == 0);
    CHECK(lines[4].rfind("# fit,10,20,", 0) == 0);
  }
  SUBCASE("needs two levels and an exact solution") {
    CHECK_THROWS_AS(run_convergence_sweep(cfg, {10}), ConfigError);
    const RunConfig kh = parse_config_text("[case]\nname = kelvin_helmholtz\n");
    CHECK_THROWS_AS(run_convergence_sweep(kh, {4, 8}), ConfigError);
  }
  SUBCASE("a blow-up names its level") {
    cfg.courant = 5.0;
    try {
      run_convergence_sweep(cfg, {20, 40});
      FAIL("expected a blow-up");
    } catch (const BlowUpError& e) {
      CHECK(std::string(e.what()).rfind("level n = 20: ", 0) == 0);
    }
  }
}

TEST_CASE("meshes follow the case geometry") {
  const auto kh = make_case("kelvin_helmholtz");
  const auto m = case_mesh(*kh, 5);
  CHECK(m->periodic_x());
  CHECK(m->num_triangles() == 50);
  CHECK_FALSE(case_mesh(*make_case("taylor_green"), 5)->periodic_x());
}
