// Shallow-water driver: Williamson test 2 (steady zonal flow, drift
// errors) and the Galewsky unstable jet (energy/enstrophy time series) on
// the cubed sphere, with the velocity transport scheme selected on the
// command line and depth always using the scalar recovered scheme.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vtm/config.hpp"
#include "vtm/swe.hpp"
#include "vtm/testcases.hpp"

using namespace vtm;

namespace {

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i)
    s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::vector<int> split_ints(const std::string& s) {
  std::vector<int> out;
  size_t pos = 0;
  while (pos < s.size()) {
    size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    out.push_back(std::stoi(s.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return out;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-implicit shallow water on the cubed sphere"};

  std::string case_name = "williamson2";
  std::string scheme = "recovered";
  std::string supg = "on";
  std::string solver;
  std::string out;
  std::string tag;
  std::string config_file;
  std::vector<int> ns;
  double dt = 0.0;
  double days = 0.0;
  int vtk_cadence = 0;
  std::vector<std::string> overrides;

  app.add_option("--case", case_name, "williamson2 or galewsky")
      ->check(CLI::IsMember({"williamson2", "galewsky"}));
  app.add_option("--scheme", scheme, "velocity transport scheme")
      ->check(CLI::IsMember({"benchmark", "recovered", "vorticity"}));
  app.add_option("--supg", supg, "on/off (vorticity scheme only)")
      ->check(CLI::IsMember({"on", "off"}));
  app.add_option("--n", ns, "cells per panel edge; several values run a sweep");
  app.add_option("--dt", dt, "time step in seconds");
  app.add_option("--days", days, "run length in days");
  app.add_option("--solver", solver, "direct or gmres for transport solves")
      ->check(CLI::IsMember({"direct", "gmres"}));
  app.add_option("--vtk-cadence", vtk_cadence,
                 "steps between VTK snapshots (0: endpoints only)");
  app.add_option("--out", out, "output directory (under VTM_OUTPUT_ROOT if relative)");
  app.add_option("--tag", tag, "output file prefix");
  app.add_option("--config", config_file, "flat key=value config file");
  app.add_option("overrides", overrides, "key=value config overrides");
  CLI11_PARSE(app, argc, argv);

  Config cfg;
  if (!config_file.empty()) cfg.load_file(config_file);
  for (const std::string& o : overrides) cfg.set_pair(o);
  if (app.count("--case")) cfg.kv["case"] = case_name;
  if (app.count("--scheme")) cfg.kv["scheme"] = scheme;
  if (app.count("--supg")) cfg.kv["supg"] = supg;
  if (app.count("--solver")) cfg.kv["solver"] = solver;
  if (app.count("--n")) cfg.kv["n"] = join_ints(ns);
  if (app.count("--dt")) cfg.kv["dt"] = format_g17(dt);
  if (app.count("--days")) cfg.kv["days"] = format_g17(days);
  if (app.count("--vtk-cadence")) cfg.kv["vtk_cadence"] = std::to_string(vtk_cadence);
  if (app.count("--out")) cfg.kv["out"] = out;
  if (app.count("--tag")) cfg.kv["tag"] = tag;

  case_name = cfg.get_string("case", "williamson2");
  scheme = cfg.get_string("scheme", "recovered");
  bool use_supg = cfg.get_string("supg", "on") == "on";
  bool galewsky = case_name == "galewsky";
  ns = split_ints(cfg.get_string("n", galewsky ? "32" : "16"));
  dt = cfg.get_double("dt", galewsky ? 900.0 : 240.0);
  days = cfg.get_double("days", galewsky ? 6.0 : 5.0);
  vtk_cadence = cfg.get_int("vtk_cadence", 0);
  // The advecting velocity changes every outer iteration, so iterative
  // transport solves pay off; the vorticity scheme factors its own
  // monolithic system regardless.
  solver = cfg.get_string("solver", "gmres");

  std::string root = output_root();
  out = cfg.get_string("out", case_name);
  std::string out_dir = out.empty() || out[0] == '/' ? out : root + "/" + out;
  std::string base_tag = cfg.get_string(
      "tag",
      scheme + (scheme == "vorticity" ? (use_supg ? "_supg" : "_nosupg") : ""));

  SWERunConfig rc;
  rc.scheme = parse_scheme(scheme);
  rc.supg = use_supg;
  rc.dt = dt;
  rc.days = days;
  rc.vtk_cadence = vtk_cadence;
  rc.u_stepper.method =
      solver == "gmres" ? SolverMethod::gmres : SolverMethod::direct;
  rc.h_stepper.method = rc.u_stepper.method;
  rc.metadata["case"] = case_name;
  rc.metadata["scheme"] = scheme;
  rc.metadata["supg"] = use_supg ? "on" : "off";
  rc.metadata["solver"] = solver;
  rc.metadata["outer_iterations"] = "2";
  rc.metadata["inner_iterations"] = "2";
  rc.metadata["git_revision"] = git_revision();

  std::vector<SWERunResult> runs;
  for (int n : ns) {
    rc.n = n;
    rc.out_dir = out_dir;
    rc.tag = base_tag + "_n" + std::to_string(n);
    SWERunResult r = galewsky ? run_galewsky(rc) : run_williamson2(rc);
    runs.push_back(r);
    std::printf("case=%s scheme=%s n=%d dt=%g steps=%d u_error=%.12e "
                "h_error=%.12e energy_drift=%.3e enstrophy=%.6e->%.6e "
                "mass_drift=%.2e seconds=%.1f\n",
                case_name.c_str(), base_tag.c_str(), r.n, r.dt, r.steps,
                r.u_error, r.h_error, r.energy_drift, r.enstrophy_initial,
                r.enstrophy_final, r.mass_drift, r.seconds);
  }

  if (runs.size() >= 3) {
    std::vector<double> h, eu, eh;
    for (const auto& r : runs) {
      h.push_back(1.0 / r.n);
      eu.push_back(r.u_error);
      eh.push_back(r.h_error);
    }
    double su = testcase::fit_slope(h, eu);
    double sh = testcase::fit_slope(h, eh);
    std::map<std::string, std::string> md = rc.metadata;
    md["u_slope"] = format_g17(su);
    md["h_slope"] = format_g17(sh);
    CsvWriter csv(out_dir + "/" + base_tag + "_convergence.csv", md,
                  {"n", "h", "dt", "u_error", "h_error", "seconds"});
    for (const auto& r : runs)
      csv.row({static_cast<double>(r.n), 1.0 / r.n, r.dt, r.u_error,
               r.h_error, r.seconds});
    std::printf("u_slope=%.3f h_slope=%.3f\n", su, sh);
  }
  return 0;
}
