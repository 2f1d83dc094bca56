#include "agdl/report.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "agdl/error.hpp"
#include "agdl/scenarios.hpp"

namespace agdl {

namespace {

std::string fmt(double v, const char* spec = "%.3f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string dot_string(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '\\';
    out += c;
  }
  return out + "\"";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::Io, "failed writing " + path.string());
}

void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  const Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorKind::Parse, path.string() + " is not valid JSON");
  return j;
}

}  // namespace

std::string export_dot_fsm(const DesignModel& model, std::string_view label) {
  if (label == "player") label = model.player_class;
  const CharacterModel* c = model.character(label);
  if (!c) throw Error(ErrorKind::NotFound, "no character class '" + std::string(label) + "' in the model");
  std::ostringstream out;
  out << "digraph " << dot_string("fsm:" + c->label) << " {\n";
  out << "  rankdir=LR;\n  node [shape=ellipse];\n";
  for (const auto& s : c->fsm.states) {
    std::string text = std::to_string(s.id) + ": " + s.name + "\\nax=" + fmt(s.ax) + " ay=" + fmt(s.ay);
    if (s.sat_x > 0.5) text += " capped-x";
    if (s.sat_y > 0.5) text += " capped-y";
    out << "  s" << s.id << " [label=" << dot_string(text) << "];\n";
  }
  for (const auto& t : c->fsm.transitions) {
    const int a = c->fsm.state_index(t.from);
    const int b = c->fsm.state_index(t.to);
    out << "  s" << a << " -> s" << b << " [label=" << dot_string(to_string(t.guards));
    if (t.low_confidence) out << ", style=dashed";
    out << "];\n";
  }
  out << "}\n";
  return out.str();
}

std::string export_dot_rooms(const DesignModel& model) {
  std::ostringstream out;
  out << "digraph rooms {\n  node [shape=box];\n";
  for (std::size_t k = 0; k < model.rooms.nodes.size(); ++k) {
    const auto& n = model.rooms.nodes[k];
    out << "  r" << k << " [label=" << dot_string("r" + std::to_string(k) + " " + n.signature.substr(0, 8)) << "];\n";
  }
  for (const auto& e : model.rooms.edges) {
    out << "  r" << e.from << " -> r" << e.to << " [label="
        << dot_string(e.exit + " x" + std::to_string(e.support)) << "];\n";
  }
  out << "}\n";
  return out.str();
}

std::string jump_table(const std::vector<DesignModel>& models, bool csv, std::vector<std::string>* warnings) {
  const std::vector<std::string> header = {"game", "gravity_up", "gravity_down", "jump_height_px", "hang_time_s",
                                           "asymmetry"};
  std::vector<std::vector<std::string>> rows;
  for (const auto& m : models) {
    std::vector<std::string> row = {m.game};
    if (m.jump) {
      row.push_back(fmt(m.jump->ascent_accel, "%.4f"));
      row.push_back(fmt(m.jump->descent_accel, "%.4f"));
      row.push_back(fmt(m.jump->height, "%.3f"));
      row.push_back(fmt(m.jump->hang_time, "%.4f"));
      row.push_back(fmt(m.jump->asymmetry, "%.4f"));
    } else {
      row.resize(header.size());
      if (warnings) warnings->push_back("model for '" + m.game + "' has no jump metrics");
    }
    rows.push_back(std::move(row));
  }
  if (warnings && std::none_of(models.begin(), models.end(), [](const DesignModel& m) { return m.jump.has_value(); })) {
    warnings->push_back("no model has jump metrics");
  }
  std::ostringstream out;
  if (csv) {
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
      out << "\n";
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out.str();
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t i = 0; i < header.size(); ++i) width[i] = header[i].size();
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  auto line = [&](const std::vector<std::string>& cells) {
    std::string text;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) text += "  ";
      const std::string pad(width[i] - cells[i].size(), ' ');
      text += i == 0 ? cells[i] + pad : pad + cells[i];
    }
    while (!text.empty() && text.back() == ' ') text.pop_back();
    out << text << "\n";
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out.str();
}

std::vector<std::string> write_corpus(const DesignModel& model, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const LevelCorpus corpus = export_level_corpus(model.rooms, model.rules);
  for (const auto& [name, text] : corpus.grids) write_text(dir / name, text);
  write_json(dir / "legend.json", legend_to_json(corpus.legend));
  std::vector<std::string> warnings;
  for (const auto& sig : corpus.skipped) warnings.push_back("room " + sig + " has no tile data; skipped");
  return warnings;
}

GroundTruthDesign resolve_design(std::string_view spec) {
  if (spec == "builtin:default") return default_design();
  if (spec == "builtin:arena") return arena_design();
  constexpr std::string_view grav = "builtin:gravity:";
  if (spec.starts_with(grav)) {
    const std::string rest(spec.substr(grav.size()));
    const auto colon = rest.find(':');
    try {
      if (colon == std::string::npos) throw std::invalid_argument("missing descent");
      return with_gravity(default_design(), std::stod(rest.substr(0, colon)), std::stod(rest.substr(colon + 1)));
    } catch (const std::exception&) {
      throw Error(ErrorKind::Argument, "expected builtin:gravity:UP:DOWN, got '" + std::string(spec) + "'");
    }
  }
  return load_design(std::string(spec));
}

int cli_main(int argc, char** argv) {
  CLI::App app{"Recover game design models from play traces"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "Run the toy platformer and write a trace");
  std::string design_spec, inputs_spec, out_path, state_out;
  std::uint64_t seed = 0;
  sim->add_option("--design", design_spec, "Design file or builtin:default|builtin:arena|builtin:gravity:UP:DOWN")
      ->required();
  sim->add_option("--inputs", inputs_spec, "script:FILE or random:SEED:N")->required();
  sim->add_option("--out", out_path, "Trace output (JSON Lines)")->required();
  sim->add_option("--seed", seed, "Simulator seed (enemy start delays)");
  sim->add_option("--state-out", state_out, "Also write the final simulator state");

  auto* lrn = app.add_subcommand("learn", "Learn a design model from traces");
  std::vector<std::string> trace_paths, overrides;
  std::string config_path, model_out;
  lrn->add_option("--trace", trace_paths, "Trace files")->required()->expected(1, -1);
  lrn->add_option("--config", config_path, "Learner configuration JSON");
  lrn->add_option("--set", overrides, "Override one setting, e.g. fsm.epsilon=0.2");
  lrn->add_option("--out", model_out, "Model output")->required();

  auto* prb = app.add_subcommand("probe", "Run an active probe against the simulator");
  std::string probe_kind, probe_design, probe_state, probe_out, probe_sig;
  prb->add_option("kind", probe_kind, "player or gravity")->required()->check(CLI::IsMember({"player", "gravity"}));
  prb->add_option("--design", probe_design, "Design file or builtin name")->required();
  prb->add_option("--state", probe_state, "Simulator state JSON, or 'initial'")->required();
  prb->add_option("--out", probe_out, "Result JSON")->required();
  prb->add_option("--signature", probe_sig, "Entity to probe for gravity (default: the player)");

  auto* evl = app.add_subcommand("eval", "Score a model against a design");
  std::string eval_model, eval_truth, eval_out;
  evl->add_option("--model", eval_model, "Model JSON")->required();
  evl->add_option("--truth", eval_truth, "Design file or builtin name")->required();
  evl->add_option("--out", eval_out, "Metrics JSON")->required();

  auto* exp = app.add_subcommand("export", "Export DOT graphs, the level corpus or a jump table");
  std::string export_kind, export_out;
  std::vector<std::string> export_models;
  exp->add_option("kind", export_kind, "dot-fsm:CLASS, dot-rooms, corpus or jump-table")->required();
  exp->add_option("--model", export_models, "Model JSON files")->required()->expected(1, -1);
  exp->add_option("--out", export_out, "Output file (directory for corpus; .csv selects CSV tables)")->required();

  auto* scn = app.add_subcommand("scenario", "Write a scripted input file for the toy platformer");
  std::string scenario_name, scenario_design = "builtin:default", scenario_out;
  std::size_t scenario_frames = 0;
  scn->add_option("name", scenario_name, "coverage, walkthrough, no-jump, jump-in-place or random:SEED:N")->required();
  scn->add_option("--design", scenario_design, "Design file or builtin name");
  scn->add_option("--frames", scenario_frames, "Length for coverage/no-jump");
  scn->add_option("--out", scenario_out, "Input script output")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*sim) {
      const GroundTruthDesign d = resolve_design(design_spec);
      const auto inputs = resolve_inputs(inputs_spec);
      if (inputs.empty()) throw Error(ErrorKind::Argument, "input script has no frames");
      Simulator s(d, seed);
      Trace t;
      t.header = s.header();
      for (const auto& in : inputs) t.frames.push_back(s.step(in));
      write_trace(t, out_path);
      if (!state_out.empty()) write_json(state_out, to_json(s.state()));
    } else if (*lrn) {
      LearnerConfig cfg;
      if (!config_path.empty()) cfg = config_from_json(read_json(config_path));
      for (const auto& o : overrides) apply_override(cfg, o);
      std::vector<Trace> traces;
      for (const auto& p : trace_paths) traces.push_back(read_trace(p));
      write_model(learn(traces, cfg), model_out);
    } else if (*prb) {
      const GroundTruthDesign d = resolve_design(probe_design);
      const SimState start = probe_state == "initial" ? Simulator(d, 0).state()
                                                      : sim_state_from_json(read_json(probe_state));
      Json result;
      result["probe"] = probe_kind;
      if (probe_kind == "player") {
        result["signature"] = probe_player_identity(d, start);
      } else {
        std::string sig = probe_sig;
        if (sig.empty()) sig = d.states[static_cast<std::size_t>(start.player.state)].sprite;
        result["signature"] = sig;
        result["gravity"] = probe_gravity(d, start, sig);
      }
      write_json(probe_out, result);
    } else if (*evl) {
      const DesignModel m = read_model(eval_model);
      write_json(eval_out, to_json(evaluate(m, resolve_design(eval_truth))));
    } else if (*exp) {
      std::vector<DesignModel> models;
      for (const auto& p : export_models) models.push_back(read_model(p));
      std::vector<std::string> warnings;
      if (export_kind.starts_with("dot-fsm:")) {
        write_text(export_out, export_dot_fsm(models.front(), export_kind.substr(8)));
      } else if (export_kind == "dot-fsm") {
        write_text(export_out, export_dot_fsm(models.front(), models.front().player_class));
      } else if (export_kind == "dot-rooms") {
        write_text(export_out, export_dot_rooms(models.front()));
      } else if (export_kind == "corpus") {
        warnings = write_corpus(models.front(), export_out);
      } else if (export_kind == "jump-table") {
        const bool csv = std::filesystem::path(export_out).extension() == ".csv";
        write_text(export_out, jump_table(models, csv, &warnings));
      } else {
        std::cerr << "unknown export kind '" << export_kind << "'\n" << exp->help();
        return 1;
      }
      for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    } else if (*scn) {
      const GroundTruthDesign d = resolve_design(scenario_design);
      std::vector<InputState> inputs;
      if (scenario_name == "coverage") {
        inputs = coverage_inputs(d, scenario_frames ? scenario_frames : 2000);
      } else if (scenario_name == "walkthrough") {
        inputs = walkthrough_inputs(d);
      } else if (scenario_name == "no-jump") {
        inputs = no_jump_inputs(d, scenario_frames ? scenario_frames : 600);
      } else if (scenario_name == "jump-in-place") {
        inputs = jump_in_place_inputs(d);
      } else if (scenario_name.starts_with("random:")) {
        inputs = resolve_inputs(scenario_name);
      } else {
        std::cerr << "unknown scenario '" << scenario_name << "'\n" << scn->help();
        return 1;
      }
      std::ofstream out(scenario_out);
      if (!out) throw Error(ErrorKind::Io, "cannot write " + scenario_out);
      write_input_script(inputs, out);
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return e.kind() == ErrorKind::Argument ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace agdl
