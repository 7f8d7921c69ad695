#include "cli.hpp"

#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "sandpile/analysis.hpp"
#include "sandpile/errors.hpp"
#include "sandpile/green.hpp"
#include "sandpile/render.hpp"
#include "sandpile/sfield.hpp"
#include "sandpile/stabilizer.hpp"
#include "verify.hpp"

namespace sandpile::cli {

using nlohmann::ordered_json;

nlohmann::ordered_json to_json(const RunConfig& c) {
  ordered_json j;
  j["subcommand"] = c.subcommand;
  j["d"] = c.d;
  j["n"] = c.n;
  j["schedule"] = c.schedule;
  j["strategy"] = c.strategy;
  j["threads"] = c.threads;
  j["tile"] = c.tile;
  j["seed"] = c.seed;
  j["mem_cap_gb"] = c.mem_cap_gb;
  j["tol"] = c.tol;
  j["radius"] = c.radius;
  j["in"] = c.in;
  j["out"] = c.out;
  j["odometer_out"] = c.odometer_out;
  j["report"] = c.report;
  j["fields_dir"] = c.fields_dir;
  j["dump_dir"] = c.dump_dir;
  j["crop"] = c.crop;
  j["palette"] = c.palette;
  j["plane"] = c.plane;
  j["phi"] = c.phi;
  j["samples"] = c.samples;
  return j;
}

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

StabilizeOptions stabilize_options(const RunConfig& c) {
  StabilizeOptions o;
  o.memory_cap_bytes = static_cast<std::uint64_t>(c.mem_cap_gb * static_cast<double>(std::uint64_t{1} << 30));
  return o;
}

Strategy strategy_of(const RunConfig& c) {
  switch (parse_strategy(c.strategy)) {
    case StrategyKind::FullSweep:
      return Strategy::sweep();
    case StrategyKind::TiledParallel:
      return Strategy::tiled(c.tile, c.threads);
    default:
      return Strategy::fifo();
  }
}

Crop parse_crop(const std::string& text) {
  std::int64_t v[4];
  std::size_t pos = 0;
  for (int j = 0; j < 4; ++j) {
    const std::size_t end = j < 3 ? text.find(',', pos) : text.size();
    require(end != std::string::npos, "--crop expects x0,y0,x1,y1");
    const char* first = text.data() + pos;
    const char* last = text.data() + end;
    auto [ptr, ec] = std::from_chars(first, last, v[j]);
    require(ec == std::errc() && ptr == last, "--crop expects four integers");
    pos = end + 1;
  }
  return {v[0], v[1], v[2], v[3]};
}

void validate(const RunConfig& c) {
  require(c.d == 2 || c.d == 3, "--d must be 2 or 3");
  require(c.strategy == "fifo" || c.strategy == "sweep" || c.strategy == "tiled", "--strategy must be fifo, sweep or tiled");
  require(c.threads >= 1, "--threads must be at least 1");
  require(c.tile >= 2, "--tile must be at least 2");
  require(c.mem_cap_gb > 0, "--mem-cap-gb must be positive");
  require(c.tol > 0 && c.tol <= 1e-6, "--tol must lie in (0, 1e-6]");
  if (c.subcommand == "stabilize" || c.subcommand == "green") require(c.n >= 1, "--n must be at least 1");
  if (c.subcommand == "green") require(c.radius > 0, "--radius must be positive");
  if (c.subcommand == "converge") {
    require(!c.schedule.empty(), "--schedule is required");
    for (std::size_t j = 0; j < c.schedule.size(); ++j) {
      require(c.schedule[j] >= 1 && (j == 0 || c.schedule[j] > c.schedule[j - 1]),
              "--schedule must be positive and strictly increasing");
    }
    require(c.samples >= 2, "--samples must be at least 2");
    for (const std::string& spec : c.phi) {
      try {
        TestFunction::parse(spec, c.d);
      } catch (const Error& e) {
        throw UsageError(std::string("--phi: ") + e.what());
      }
    }
  }
  if (c.subcommand == "render") {
    require(!c.in.empty(), "--in is required");
    require(!c.out.empty(), "--out is required");
    require(c.palette == "default" || c.palette == "gray4" || c.palette == "gray6",
            "--palette must be default, gray4 or gray6");
    if (!c.crop.empty()) parse_crop(c.crop);
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot write " + path);
  f << text;
}

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot write " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

// Exact site-by-site invariants of a stabilization.
std::vector<std::string> check_result(const ChipGrid& eta, const StabilizeResult& r) {
  std::vector<std::string> bad;
  const std::int64_t two_d = 2 * eta.dim();
  if (r.final.values().sum() != eta.values().sum()) bad.push_back("mass not conserved");
  if (r.final.values().minCoeff() < 0 || r.final.values().maxCoeff() >= two_d) bad.push_back("final not stable");
  const IntegerField lap = apply_laplacian(r.odometer);
  for (std::int64_t i = 0; i < lap.box().size(); ++i) {
    const Site z = lap.box().site(i);
    if (r.final.value_or_zero(z) != eta.value_or_zero(z) + lap.values()[i]) {
      bad.push_back("final differs from eta + Laplacian(odometer)");
      break;
    }
  }
  return bad;
}

int cmd_stabilize(const RunConfig& c, std::ostream& out) {
  const ChipGrid eta = point_pile(c.n, c.d);
  const StabilizeResult r = stabilize(eta, strategy_of(c), stabilize_options(c));
  const std::vector<std::string> bad = check_result(eta, r);
  if (!c.out.empty()) save_sfield(c.out, retag<SignedTag>(r.final));
  if (!c.odometer_out.empty()) save_sfield(c.odometer_out, retag<SignedTag>(r.odometer));

  ordered_json j;
  j["n"] = c.n;
  j["d"] = c.d;
  j["strategy"] = std::string(to_string(r.strategy.kind));
  j["total_topples"] = r.total_topples;
  j["radius"] = measured_radius(r.final);
  j["half_width"] = r.final.box().half_width();
  j["violations"] = bad;
  if (!c.report.empty()) {
    ordered_json report = j;
    report["config"] = to_json(c);
    write_text(c.report, report.dump(2) + "\n");
  }
  j["wall_time_ms"] = std::chrono::duration<double, std::milli>(r.wall_time).count();
  out << j.dump() << "\n";
  return bad.empty() ? kOk : kViolation;
}

int cmd_green(const RunConfig& c, std::ostream& out) {
  GreenProblem p;
  p.dim = c.d;
  p.n = c.n;
  p.outer_radius = c.radius;
  p.tolerance = c.tol;
  const GreenSolution g = solve_phi_n(p);
  if (!c.out.empty()) save_sfield(c.out, g.phi);
  ordered_json j;
  j["config"] = to_json(c);
  j["h"] = g.phi.h();
  j["half_width"] = g.phi.box().half_width();
  j["unknowns"] = g.unknowns;
  j["reduced_unknowns"] = g.reduced_unknowns;
  j["iterations"] = g.iterations;
  j["residual"] = g.residual;
  j["converged"] = g.residual <= c.tol;
  if (!c.report.empty()) write_text(c.report, j.dump(2) + "\n");
  out << j.dump() << "\n";
  return g.residual <= c.tol ? kOk : kViolation;
}

std::vector<std::string> default_phis(int d) {
  if (d == 2) return {"bump:0:0.3", "bump:0.15,0:0.2", "polybump:0.1,0.1:0.25:1,1"};
  return {"bump:0:0.3", "bump:0.15,0,0:0.2", "polybump:0.1,0.1,0:0.25:1,1,0"};
}

int cmd_converge(const RunConfig& c, std::ostream& out) {
  const std::vector<std::string> specs = c.phi.empty() ? default_phis(c.d) : c.phi;
  std::vector<TestFunction> functions;
  for (const std::string& s : specs) functions.push_back(TestFunction::parse(s, c.d));

  StudyOptions options;
  options.strategy = strategy_of(c);
  options.stabilize = stabilize_options(c);
  options.tolerance = c.tol;
  options.samples_per_axis = c.samples;
  FieldSink sink;
  if (!c.fields_dir.empty()) {
    std::filesystem::create_directories(c.fields_dir);
    sink = [&](std::int64_t n, const RealField& sbar, const RealField& w) {
      const std::filesystem::path dir(c.fields_dir);
      save_sfield(dir / ("sbar_n" + std::to_string(n) + ".sfield"), sbar);
      save_sfield(dir / ("wbar_n" + std::to_string(n) + ".sfield"), w);
    };
  }
  const ConvergenceReport r = run_convergence_study(c.schedule, functions, c.d, options, sink);

  ordered_json j;
  j["config"] = to_json(c);
  j["dim"] = r.dim;
  j["test_functions"] = r.test_functions;
  j["covering_function"] = r.covering_function;
  j["outer_radius"] = r.outer_radius;
  j["compare_radius"] = r.compare_radius;
  ordered_json rows = ordered_json::array();
  for (const StudyRow& row : r.rows) {
    ordered_json x;
    x["n"] = row.n;
    x["h"] = row.h;
    x["mass"] = row.mass;
    x["radius"] = row.radius;
    x["rescaled_radius"] = row.rescaled_radius;
    x["radius_ratio"] = row.radius_ratio;
    x["s_min"] = row.s_min;
    x["s_max"] = row.s_max;
    x["total_topples"] = row.total_topples;
    x["pairings"] = row.pairings;
    x["covering_pairing"] = row.covering_pairing;
    x["outside_mismatch"] = row.outside_mismatch;
    x["green_iterations"] = row.green_iterations;
    x["green_residual"] = row.green_residual;
    x["violations"] = row.violations;
    rows.push_back(std::move(x));
  }
  j["rows"] = std::move(rows);
  ordered_json gaps = ordered_json::array();
  for (const StudyGap& g : r.gaps) {
    gaps.push_back({{"n_from", g.n_from}, {"n_to", g.n_to}, {"w_gap", g.w_gap}, {"pairing_gaps", g.pairing_gaps}});
  }
  j["gaps"] = std::move(gaps);
  j["warnings"] = r.warnings;
  j["invariants_ok"] = r.invariants_ok();

  const std::string text = j.dump(2) + "\n";
  if (!c.out.empty()) {
    write_text(c.out, text);
    out << ordered_json{{"out", c.out}, {"rows", r.rows.size()}, {"invariants_ok", r.invariants_ok()}}.dump() << "\n";
  } else {
    out << text;
  }
  return r.invariants_ok() ? kOk : kViolation;
}

int cmd_render(const RunConfig& c, std::ostream& out) {
  const ChipGrid s = load_chip_grid(c.in);
  std::optional<Crop> crop;
  if (!c.crop.empty()) crop = parse_crop(c.crop);
  const Image img = render_image(s, Palette::named(c.palette, s.dim()), crop, c.plane);
  write_bytes(c.out, encode_png(img));
  out << ordered_json{{"out", c.out}, {"width", img.width}, {"height", img.height}}.dump() << "\n";
  return kOk;
}

int cmd_verify(const RunConfig& c, std::ostream& out) {
  bool passed = false;
  ordered_json j;
  j["config"] = to_json(c);
  j.update(run_verify(c.seed, c.dump_dir, &passed));
  const std::string text = j.dump(2) + "\n";
  if (!c.out.empty()) write_text(c.out, text);
  out << text;
  return passed ? kOk : kViolation;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"Abelian sandpile point-pile toolkit", "sandpile"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  auto common = [&](CLI::App* sub) {
    sub->add_option("--d", c.d, "Lattice dimension (2 or 3)")->capture_default_str();
    sub->add_option("--strategy", c.strategy, "fifo, sweep or tiled")->capture_default_str();
    sub->add_option("--threads", c.threads, "Workers for the tiled strategy")->capture_default_str();
    sub->add_option("--tile", c.tile, "Slab thickness for the tiled strategy")->capture_default_str();
    sub->add_option("--mem-cap-gb", c.mem_cap_gb, "Working memory cap in GiB")->capture_default_str();
    sub->add_option("--seed", c.seed, "Random seed")->capture_default_str();
    sub->add_option("--tol", c.tol, "Green solver relative residual")->capture_default_str();
  };

  CLI::App* stab = app.add_subcommand("stabilize", "Stabilize n chips at the origin");
  common(stab);
  stab->add_option("--n", c.n, "Number of chips")->required();
  stab->add_option("--out", c.out, "Final configuration (sfield)");
  stab->add_option("--odometer", c.odometer_out, "Odometer (sfield)");
  stab->add_option("--report", c.report, "JSON report without timing");

  CLI::App* green = app.add_subcommand("green", "Discrete fundamental solution on a ball");
  common(green);
  green->add_option("--n", c.n, "Number of chips, h = n^(-1/d)")->required();
  green->add_option("--radius", c.radius, "Outer radius R'")->required();
  green->add_option("--out", c.out, "Potential (sfield)");
  green->add_option("--report", c.report, "JSON report");

  CLI::App* conv = app.add_subcommand("converge", "Cross-n convergence study");
  common(conv);
  conv->add_option("--schedule", c.schedule, "Comma separated n values")->delimiter(',')->required();
  conv->add_option("--phi", c.phi, "Test function, repeatable (bump:c:r, polybump:c:r:a, plateau:c:r0:r1)");
  conv->add_option("--samples", c.samples, "Comparison grid points per axis")->capture_default_str();
  conv->add_option("--out", c.out, "JSON report path");
  conv->add_option("--fields-dir", c.fields_dir, "Directory for sbar/wbar sfield dumps");

  CLI::App* rend = app.add_subcommand("render", "PNG of a stable configuration");
  rend->add_option("--in", c.in, "Configuration (sfield)")->required();
  rend->add_option("--out", c.out, "PNG path")->required();
  rend->add_option("--crop", c.crop, "x0,y0,x1,y1 inclusive");
  rend->add_option("--palette", c.palette, "default, gray4 or gray6")->capture_default_str();
  rend->add_option("--plane", c.plane, "Axis-2 slice for d = 3")->capture_default_str();

  CLI::App* ver = app.add_subcommand("verify", "Property suites with counterexample dumps");
  ver->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  ver->add_option("--out", c.out, "JSON report path");
  ver->add_option("--dump-dir", c.dump_dir, "Where counterexamples go")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help("", CLI::AppFormatMode::All);
    return kUsage;
  }
  c.subcommand = app.get_subcommands().front()->get_name();

  try {
    validate(c);
    if (c.subcommand == "stabilize") return cmd_stabilize(c, out);
    if (c.subcommand == "green") return cmd_green(c, out);
    if (c.subcommand == "converge") return cmd_converge(c, out);
    if (c.subcommand == "render") return cmd_render(c, out);
    return cmd_verify(c, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << app.help("", CLI::AppFormatMode::All);
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace sandpile::cli
