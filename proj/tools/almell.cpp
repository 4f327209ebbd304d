// almell -- command-line front end.
//
// Loads JSON presentations, runs validations / decisions / samplers /
// the bundled gallery, and emits reproducible reports.  Every report
// echoes the seed and sample count and embeds the schema version and
// tolerance constants, so two runs on the same (input, seed, N, version)
// are byte-identical; worker count never changes a report.
//
// Exit codes:
//   0  clean verdict (the verdict itself may be negative)
//   1  I/O or schema error; the diagnostic names the offending field
//   2  validation failure (the input is well-formed but violates an invariant)
//   3  EquivalenceViolation / InternalDisagreement / gallery assertion failure

#include "almell/gallery.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace almell {
namespace {

struct CliOptions {
  std::string input;
  std::string output;            // empty = stdout
  std::string format = "json";   // json | text
  std::string gallery_dir = "gallery";
  std::string entry;             // gallery positional; empty = run all
  std::uint64_t seed = 0;
  long samples = 10000;
  long kmax = 10000;
  int workers = 1;
  double scale = 1.0;
  double tol_spectral = tol::spectral;
  bool no_sample = false;
};

// What the subcommand handlers hand back to main: the report payload, its
// text rendering, and the exit code the verdict maps to.
struct Outcome {
  json payload;
  std::string text;
  int exit_code = 0;
};

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::io_error:
    case ErrorCode::schema_error:
      return 1;
    case ErrorCode::equivalence_violation:
    case ErrorCode::internal_disagreement:
      return 3;
    default:
      return 2;
  }
}

DecisionOptions decision_options(const CliOptions& opt) {
  DecisionOptions d;
  d.seed = opt.seed;
  d.n_samples = opt.samples;
  d.workers = opt.workers;
  d.scale = opt.scale;
  d.sample = !opt.no_sample;
  return d;
}

SamplerOptions sampler_options(const CliOptions& opt) {
  SamplerOptions s;
  s.scale = opt.scale;
  s.workers = opt.workers;
  return s;
}

[[noreturn]] void wrong_document_type(const std::string& command, const InputDocument& doc,
                                      const std::string& expected) {
  throw Error(ErrorCode::schema_error,
              "`" + command + "` cannot use a \"" + doc.type + "\" document; expected " +
                  expected + " at input.type",
              json{{"field", "input.type"}, {"got", doc.type}, {"expected", expected}});
}

void merge_reports(ValidationReport& into, const ValidationReport& from) {
  into.accepted = into.accepted && from.accepted;
  into.residuals.insert(into.residuals.end(), from.residuals.begin(), from.residuals.end());
  into.failures.insert(into.failures.end(), from.failures.begin(), from.failures.end());
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

Outcome run_validate(const InputDocument& doc) {
  // The loaders already reject structural violations (those surface as exit 2
  // before we get here); this re-runs the validators to report the residuals.
  ValidationReport report;
  if (doc.algebra) {
    report = doc.algebra->validate();
  } else if (doc.compact) {
    report = validate_torus_rep(doc.compact->torus);
    merge_reports(report, CompactPart::validate_compact_part(*doc.compact));
  } else if (doc.solvable) {
    report = doc.solvable->validate();
  } else if (doc.group) {
    report = validate_presentation(*doc.group);
  } else if (doc.delta) {
    report = doc.delta->solvable.validate();
    merge_reports(report, check_automorphism(doc.delta->solvable, doc.delta->phi));
  } else {
    // power_family: squareness is enforced by the loader; record the count so
    // the report is not empty.
    report.residuals.emplace_back("member_count",
                                  static_cast<double>(doc.powers->members.size()));
  }

  Outcome out;
  out.payload = json{{"document", doc.type}, {"validation", report.to_json()}};
  out.exit_code = report.accepted ? 0 : 2;

  std::ostringstream text;
  text << "document:  " << doc.type << "\n"
       << "accepted:  " << (report.accepted ? "yes" : "no") << "\n";
  for (const auto& [name, value] : report.residuals)
    text << "  " << name << " = " << value << "\n";
  for (const std::string& f : report.failures) text << "  FAILED: " << f << "\n";
  out.text = text.str();
  return out;
}

// ---------------------------------------------------------------------------
// weights
// ---------------------------------------------------------------------------

Outcome run_weights(const InputDocument& doc) {
  const TorusRep* rep = nullptr;
  if (doc.compact) {
    rep = &doc.compact->torus;
  } else if (doc.group && doc.group->kind == GroupKind::vector_by_compact &&
             doc.group->compact) {
    rep = &doc.group->compact->torus;
  } else {
    wrong_document_type("weights", doc, "a torus_rep or a vector-by-compact group");
  }
  WeightMultiset W = weights(*rep);

  Outcome out;
  out.payload = json{{"weights", W.to_json()}, {"trivial_weight_free", !W.has_zero()}};

  std::ostringstream text;
  text << "rank " << W.rank << ", dim " << W.total_dim << "\n";
  for (const WeightEntry& e : W.entries) {
    text << "  (";
    for (std::size_t i = 0; i < e.weight.size(); ++i)
      text << (i ? "," : "") << e.weight[i];
    text << ") x " << e.multiplicity << "\n";
  }
  text << "trivial_weight_free: " << (W.has_zero() ? "no" : "yes") << "\n";
  out.text = text.str();
  return out;
}

// ---------------------------------------------------------------------------
// decide / battery
// ---------------------------------------------------------------------------

const GroupPresentation& require_group(const std::string& command, const InputDocument& doc) {
  if (!doc.group) wrong_document_type(command, doc, "a group presentation");
  return *doc.group;
}

std::string render_conditions(const std::vector<ConditionEntry>& conditions) {
  std::ostringstream text;
  for (const ConditionEntry& c : conditions)
    text << "  (" << c.label << ") " << (c.holds ? "holds" : "fails") << "\n";
  return text.str();
}

std::string render_density(const DensityReport& d) {
  std::ostringstream text;
  text << "fraction " << d.fraction << "  ci95 [" << d.ci_lo << ", " << d.ci_hi << "]  n "
       << d.n << "  undetermined " << d.undetermined << "  seed " << d.seed << "\n";
  return text.str();
}

Outcome run_decide(const InputDocument& doc, const CliOptions& opt) {
  DecisionReport report = decide(require_group("decide", doc), decision_options(opt));

  Outcome out;
  out.payload = report.to_json();

  std::ostringstream text;
  text << "verdict: "
       << (report.openly_almost_elliptic ? "openly_almost_elliptic" : "not_almost_elliptic")
       << "\n"
       << render_conditions(report.conditions);
  if (report.semisimple_compact)
    text << "  semisimple quotient compact: " << (*report.semisimple_compact ? "yes" : "no")
         << "\n";
  for (const LayerReport& l : report.layers)
    text << "  layer " << l.index << ": dim " << l.dim << ", nc " << l.nc_dim
         << ", trivial_weight_free " << (l.trivial_weight_free ? "yes" : "no") << "\n";
  if (report.sampling) text << "sampling: " << render_density(*report.sampling);
  if (!report.warnings.empty()) text << "warnings: " << report.warnings.size() << "\n";
  out.text = text.str();
  return out;
}

Outcome run_battery(const InputDocument& doc, const CliOptions& opt) {
  BatteryReport report = equivalence_battery(require_group("battery", doc),
                                             decision_options(opt));

  Outcome out;
  out.payload = report.to_json();
  out.text = "value: " + std::string(report.value ? "true" : "false") + "\n" +
             render_conditions(report.entries);
  return out;
}

// ---------------------------------------------------------------------------
// sample
// ---------------------------------------------------------------------------

Outcome run_sample(const InputDocument& doc, const CliOptions& opt) {
  DensityReport report;
  std::string what;
  if (doc.compact) {
    // Torus representation alone: Haar measure of the free-rotation locus.
    report = fr_density_estimate(doc.compact->torus, opt.samples, opt.seed);
    what = "free_rotation_locus";
  } else if (doc.group) {
    const GroupPresentation& G = *doc.group;
    if (G.kind == GroupKind::vector_by_compact && G.compact) {
      report = elliptic_density_abelian(*G.compact, opt.samples, opt.seed,
                                        sampler_options(opt));
    } else if (G.realization) {
      report = elliptic_density_solvable(*G.realization, G.adjoint_generators, opt.samples,
                                         opt.seed, sampler_options(opt));
    } else {
      throw Error(ErrorCode::invalid_argument,
                  "elliptic sampling needs a matrix realization of the solvable part");
    }
    what = "elliptic_elements";
  } else {
    wrong_document_type("sample", doc, "a torus_rep or a group presentation");
  }

  Outcome out;
  out.payload = json{{"estimate", what}, {"density", report.to_json()}};
  out.text = what + ": " + render_density(report);
  return out;
}

// ---------------------------------------------------------------------------
// solve-delta
// ---------------------------------------------------------------------------

Outcome run_solve_delta(const InputDocument& doc) {
  if (!doc.delta) wrong_document_type("solve-delta", doc, "a delta_problem");
  const DeltaProblem& problem = *doc.delta;
  GroupElement v = element_from_coords(problem.solvable, problem.target);
  DeltaSolveInfo info;
  GroupElement x = delta_solve(problem.solvable, problem.phi, v, &info);

  Outcome out;
  out.payload = json{{"solution", vector_to_json(x.coords)},
                     {"residual", info.residual},
                     {"sigma_min", info.sigma_min},
                     {"condition", info.condition},
                     {"newton_iterations", info.newton_iterations}};

  std::ostringstream text;
  text << "solution coords:";
  for (int i = 0; i < x.coords.size(); ++i) text << " " << x.coords(i);
  text << "\nresidual " << info.residual << "  sigma_min(1-phi) " << info.sigma_min
       << "  condition " << info.condition << "  newton iterations "
       << info.newton_iterations << "\n";
  out.text = text.str();
  return out;
}

// ---------------------------------------------------------------------------
// power-norms
// ---------------------------------------------------------------------------

Outcome run_power_norms(const InputDocument& doc, const CliOptions& opt) {
  if (!doc.powers) wrong_document_type("power-norms", doc, "a power_family");
  const PowerFamily& family = *doc.powers;
  std::vector<double> sups = power_norm_divergence(family.members, opt.kmax);

  Outcome out;
  json members = json::array();
  std::ostringstream text;
  for (std::size_t i = 0; i < family.members.size(); ++i) {
    // Per-member spectral check with the configurable unit-circle tolerance;
    // a refusal (ambiguous spectrum) is reported as null, not guessed.
    json elliptic;
    try {
      elliptic = is_elliptic_matrix(family.members[i], opt.tol_spectral);
    } catch (const Error&) {
      elliptic = nullptr;
    }
    members.push_back(json{{"name", family.names[i]},
                           {"sup_power_norm", sups[i]},
                           {"elliptic", elliptic}});
    text << "  " << family.names[i] << ": sup |g^k - 1| = " << sups[i] << "  elliptic "
         << elliptic.dump() << "\n";
  }
  out.payload = json{{"k_max", opt.kmax}, {"members", std::move(members)}};
  out.text = "k_max " + std::to_string(opt.kmax) + "\n" + text.str();
  return out;
}

// ---------------------------------------------------------------------------
// gallery
// ---------------------------------------------------------------------------

Outcome run_gallery_command(const CliOptions& opt) {
  GalleryOptions gopt;
  gopt.seed = opt.seed;
  gopt.n_samples = opt.samples;
  gopt.workers = opt.workers;
  gopt.scale = opt.scale;
  gopt.k_max = opt.kmax;

  std::vector<GalleryOutcome> outcomes;
  if (opt.entry.empty())
    outcomes = run_gallery(opt.gallery_dir, gopt);
  else
    outcomes.push_back(run_gallery_entry(opt.gallery_dir, opt.entry, gopt));

  Outcome out;
  json entries = json::array();
  std::ostringstream text;
  bool all_passed = true;
  std::string first_failure;
  for (const GalleryOutcome& o : outcomes) {
    entries.push_back(o.report());
    all_passed = all_passed && o.passed;
    if (!o.passed && first_failure.empty()) first_failure = o.entry;
    text << o.entry << ": " << (o.passed ? "pass" : "FAIL") << "\n";
    for (const GalleryCheck& c : o.checks)
      if (!c.passed) text << "  failed check: " << c.name << "\n";
  }
  out.payload = json{{"passed", all_passed}, {"entries", std::move(entries)}};
  out.text = text.str();
  out.exit_code = all_passed ? 0 : 3;
  if (!all_passed)
    std::cerr << "gallery assertion failed: " << first_failure << "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Report plumbing
// ---------------------------------------------------------------------------

json envelope(const std::string& command, const CliOptions& opt, json payload) {
  json out{{"command", command},
           {"seed", opt.seed},
           {"samples", opt.samples},
           {"header", report_header()},
           {"report", std::move(payload)}};
  if (!opt.input.empty()) out["input"] = opt.input;
  return out;
}

void write_report(const CliOptions& opt, const std::string& body) {
  if (opt.output.empty()) {
    std::cout << body << "\n";
    return;
  }
  std::ofstream file(opt.output, std::ios::binary);
  if (!file)
    throw Error(ErrorCode::io_error, "cannot write " + opt.output,
                json{{"path", opt.output}});
  file << body << "\n";
}

int emit(const std::string& command, const CliOptions& opt, const Outcome& out) {
  if (opt.format == "text")
    write_report(opt, out.text);
  else
    write_report(opt, envelope(command, opt, out.payload).dump(2));
  return out.exit_code;
}

int emit_error(const std::string& command, const CliOptions& opt, const Error& e) {
  const int code = exit_code_for(e.code());
  std::cerr << "error: " << e.what();
  if (e.details().contains("field"))
    std::cerr << " (field: " << e.details()["field"].get<std::string>() << ")";
  std::cerr << "\n";
  json payload{{"error", json{{"code", error_code_name(e.code())},
                              {"message", e.what()},
                              {"details", e.details()}}}};
  try {
    if (opt.format == "text")
      write_report(opt, std::string(e.what()) + "\n");
    else
      write_report(opt, envelope(command, opt, std::move(payload)).dump(2));
  } catch (const Error&) {
    // Failing to write the error report must not mask the original error.
  }
  return code;
}

int run(const std::string& command, const CliOptions& opt) {
  try {
    Outcome out;
    if (command == "gallery") {
      out = run_gallery_command(opt);
    } else {
      InputDocument doc = load_input_file(opt.input);
      if (command == "validate")
        out = run_validate(doc);
      else if (command == "weights")
        out = run_weights(doc);
      else if (command == "decide")
        out = run_decide(doc, opt);
      else if (command == "sample")
        out = run_sample(doc, opt);
      else if (command == "solve-delta")
        out = run_solve_delta(doc);
      else if (command == "battery")
        out = run_battery(doc, opt);
      else
        out = run_power_norms(doc, opt);
    }
    return emit(command, opt, out);
  } catch (const Error& e) {
    return emit_error(command, opt, e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace
}  // namespace almell

int main(int argc, char** argv) {
  almell::CliOptions opt;
  CLI::App app{"almell: almost-ellipticity decisions for Lie group presentations"};
  app.require_subcommand(1);

  // Shared flags; registered per subcommand so `almell decide --help` shows
  // exactly what that subcommand reads.
  auto add_io = [&](CLI::App* cmd, bool needs_input) {
    if (needs_input)
      cmd->add_option("--input", opt.input, "input JSON document")->required();
    cmd->add_option("--output", opt.output, "write the report here (default: stdout)");
    cmd->add_option("--format", opt.format, "report format (default: json)")
        ->check(CLI::IsMember({"json", "text"}));
  };
  auto add_sampling = [&](CLI::App* cmd) {
    cmd->add_option("--seed", opt.seed, "RNG seed (default: 0)");
    cmd->add_option("--samples", opt.samples, "Monte Carlo sample count (default: 10000)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--scale", opt.scale, "Gaussian translation scale (default: 1.0)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--workers", opt.workers,
                    "sampling threads; never changes results (default: 1)")
        ->check(CLI::PositiveNumber);
  };

  CLI::App* validate = app.add_subcommand("validate", "check a document against its invariants");
  add_io(validate, true);

  CLI::App* weights = app.add_subcommand("weights", "torus weight multiset of a representation");
  add_io(weights, true);

  CLI::App* decide = app.add_subcommand("decide", "decide open almost-ellipticity of a group");
  add_io(decide, true);
  add_sampling(decide);
  decide->add_flag("--no-sample", opt.no_sample, "skip the Monte Carlo cross-check");

  CLI::App* sample = app.add_subcommand("sample", "Monte Carlo density estimate");
  add_io(sample, true);
  add_sampling(sample);

  CLI::App* solve_delta =
      app.add_subcommand("solve-delta", "solve the twisted-coboundary equation delta(x) = v");
  add_io(solve_delta, true);

  CLI::App* battery =
      app.add_subcommand("battery", "evaluate the seven equivalent conditions independently");
  add_io(battery, true);
  add_sampling(battery);

  CLI::App* gallery = app.add_subcommand("gallery", "run the bundled example presentations");
  add_io(gallery, false);
  add_sampling(gallery);
  gallery->add_option("name", opt.entry, "run a single entry (default: all)");
  gallery->add_option("--dir", opt.gallery_dir,
                      "directory holding the gallery inputs (default: gallery)");
  gallery->add_option("--kmax", opt.kmax, "power iteration bound (default: 10000)")
      ->check(CLI::PositiveNumber);

  CLI::App* power_norms =
      app.add_subcommand("power-norms", "sup of |g^k - 1| over k = 1..kmax per family member");
  add_io(power_norms, true);
  power_norms->add_option("--kmax", opt.kmax, "power iteration bound (default: 10000)")
      ->check(CLI::PositiveNumber);
  power_norms->add_option("--tol-spectral", opt.tol_spectral,
                          "unit-modulus tolerance for the spectral check (default: 1e-6)")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints the message or the help text
    return code == 0 ? 0 : 1;      // bad argv maps to exit 1, like schema errors
  }

  return almell::run(app.get_subcommands().front()->get_name(), opt);
}
