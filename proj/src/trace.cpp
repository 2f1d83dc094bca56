#include "agdl/trace.hpp"

#include <fstream>
#include <sstream>

#include "agdl/error.hpp"

namespace agdl {

std::optional<Button> parse_button(std::string_view name) {
  for (std::size_t i = 0; i < kButtonNames.size(); ++i) {
    if (kButtonNames[i] == name) return static_cast<Button>(i);
  }
  return std::nullopt;
}

std::string_view button_name(Button b) { return kButtonNames[static_cast<std::size_t>(b)]; }

InputState::InputState(std::initializer_list<Button> buttons) {
  for (Button b : buttons) press(b);
}

std::vector<std::string> InputState::names() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < kButtonNames.size(); ++i) {
    if (held(static_cast<Button>(i))) out.emplace_back(kButtonNames[i]);
  }
  return out;
}

std::string TraceHeader::game_id() const {
  if (meta.is_object() && meta.contains("game") && meta["game"].is_string()) {
    return meta["game"].get<std::string>();
  }
  return source;
}

void validate(const Trace& trace) {
  const auto& h = trace.header;
  if (h.fps <= 0) throw Error(ErrorKind::Integrity, "fps must be positive");
  if (h.tile_size <= 0) throw Error(ErrorKind::Integrity, "tile_size must be positive");
  if (trace.frames.empty()) throw Error(ErrorKind::Integrity, "trace has no frames");
  for (std::size_t i = 0; i < trace.frames.size(); ++i) {
    const Frame& f = trace.frames[i];
    if (f.index < 0) throw Error(ErrorKind::Integrity, "negative frame index");
    if (i > 0 && f.index != trace.frames[i - 1].index + 1) {
      throw Error(ErrorKind::Integrity, "non-consecutive frame index " + std::to_string(f.index) +
                                            " after " + std::to_string(trace.frames[i - 1].index));
    }
    for (const auto& e : f.entities) {
      if (e.w < 1 || e.h < 1) {
        throw Error(ErrorKind::Integrity, "entity box must be at least 1x1 at frame " +
                                              std::to_string(f.index));
      }
    }
    if (f.tiles) {
      for (const auto& t : *f.tiles) {
        if (t.col < 0 || t.row < 0 || t.id < 0) {
          throw Error(ErrorKind::Integrity, "negative tile coordinate or id at frame " +
                                                std::to_string(f.index));
        }
      }
    }
  }
}

Json frame_to_json(const Frame& frame) {
  Json j;
  j["f"] = frame.index;
  j["cam"] = Json::array({frame.cam_x, frame.cam_y});
  j["in"] = frame.input.names();
  Json ents = Json::array();
  for (const auto& e : frame.entities) {
    Json je;
    je["sig"] = e.signature;
    je["x"] = e.x;
    je["y"] = e.y;
    je["w"] = e.w;
    je["h"] = e.h;
    je["hf"] = e.hflip ? 1 : 0;
    je["vf"] = e.vflip ? 1 : 0;
    ents.push_back(std::move(je));
  }
  j["ents"] = std::move(ents);
  j["tmsig"] = frame.tilemap_sig;
  if (frame.tiles) {
    Json tiles = Json::array();
    for (const auto& t : *frame.tiles) tiles.push_back(Json::array({t.col, t.row, t.id}));
    j["tiles"] = std::move(tiles);
  }
  return j;
}

namespace {

bool flag_from(const Json& v) {
  if (v.is_boolean()) return v.get<bool>();
  const int i = v.get<int>();
  if (i != 0 && i != 1) throw std::invalid_argument("flag must be 0 or 1");
  return i == 1;
}

TraceHeader header_from_json(const Json& j) {
  if (!j.is_object() || j.value("format", std::string{}) != kTraceFormat) {
    throw Error(ErrorKind::Parse, "line 1: missing agdl-trace header");
  }
  const int version = j.at("version").get<int>();
  if (version != kTraceVersion) {
    throw Error(ErrorKind::UnsupportedVersion,
                "line 1: unsupported agdl-trace version " + std::to_string(version));
  }
  TraceHeader h;
  h.fps = j.at("fps").get<int>();
  h.source = j.at("source").get<std::string>();
  h.tile_size = j.at("tile_size").get<int>();
  if (j.contains("meta")) h.meta = j["meta"];
  return h;
}

Json header_to_json(const TraceHeader& h) {
  Json j;
  j["format"] = kTraceFormat;
  j["version"] = kTraceVersion;
  j["fps"] = h.fps;
  j["source"] = h.source;
  j["tile_size"] = h.tile_size;
  j["meta"] = h.meta;
  return j;
}

}  // namespace

Frame frame_from_json(const Json& j) {
  Frame f;
  f.index = j.at("f").get<std::int64_t>();
  const auto& cam = j.at("cam");
  if (!cam.is_array() || cam.size() != 2) throw std::invalid_argument("cam must be [cx,cy]");
  f.cam_x = cam[0].get<double>();
  f.cam_y = cam[1].get<double>();
  for (const auto& b : j.at("in")) {
    auto button = parse_button(b.get<std::string>());
    if (!button) throw std::invalid_argument("unknown button " + b.get<std::string>());
    f.input.press(*button);
  }
  for (const auto& je : j.at("ents")) {
    EntityObservation e;
    e.signature = je.at("sig").get<std::string>();
    e.x = je.at("x").get<double>();
    e.y = je.at("y").get<double>();
    e.w = je.at("w").get<int>();
    e.h = je.at("h").get<int>();
    e.hflip = je.contains("hf") ? flag_from(je["hf"]) : false;
    e.vflip = je.contains("vf") ? flag_from(je["vf"]) : false;
    f.entities.push_back(std::move(e));
  }
  f.tilemap_sig = j.at("tmsig").get<std::string>();
  if (j.contains("tiles")) {
    std::vector<TileCell> tiles;
    for (const auto& t : j["tiles"]) {
      if (!t.is_array() || t.size() != 3) throw std::invalid_argument("tile must be [col,row,id]");
      tiles.push_back({t[0].get<int>(), t[1].get<int>(), t[2].get<int>()});
    }
    f.tiles = std::move(tiles);
  }
  return f;
}

Trace parse_trace(std::istream& in) {
  Trace trace;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::exception& e) {
      throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!have_header) {
      try {
        trace.header = header_from_json(j);
      } catch (const Json::exception& e) {
        throw Error(ErrorKind::Parse, "line 1: " + std::string(e.what()));
      }
      have_header = true;
      continue;
    }
    Frame f;
    try {
      f = frame_from_json(j);
    } catch (const std::exception& e) {
      throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!trace.frames.empty() && f.index != trace.frames.back().index + 1) {
      throw Error(ErrorKind::Integrity, "line " + std::to_string(line_no) +
                                            ": non-consecutive frame index " +
                                            std::to_string(f.index));
    }
    trace.frames.push_back(std::move(f));
  }
  if (!have_header) throw Error(ErrorKind::Parse, "line 1: empty trace file");
  try {
    validate(trace);
  } catch (const Error& e) {
    throw Error(e.kind(), "line " + std::to_string(line_no) + ": " + e.what());
  }
  return trace;
}

void serialize_trace(const Trace& trace, std::ostream& out) {
  out << header_to_json(trace.header).dump() << '\n';
  for (const auto& f : trace.frames) out << frame_to_json(f).dump() << '\n';
}

std::string serialize_trace(const Trace& trace) {
  std::ostringstream os;
  serialize_trace(trace, os);
  return os.str();
}

Trace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open trace " + path.string());
  return parse_trace(in);
}

void write_trace(const Trace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write trace " + path.string());
  serialize_trace(trace, out);
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

}  // namespace agdl
