#include "marlens/scenario.hpp"

#include <charconv>
#include <vector>

namespace marlens {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

// Parses a strictly-decimal integer; anything else is a grammar violation.
int parse_int(const std::string& tok, const char* what) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw MalformedName(std::string("non-numeric ") + what + ": '" + tok + "'");
  return value;
}

bool is_version(const std::string& tok) {
  if (tok.size() < 2 || tok[0] != 'v') return false;
  for (std::size_t i = 1; i < tok.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(tok[i]))) return false;
  return true;
}

Scenario parse_lbf(const std::vector<std::string>& seg) {
  Scenario s;
  s.env_kind = EnvKind::LBF;
  std::size_t i = 1;
  auto next = [&]() -> const std::string& {
    if (i >= seg.size()) throw MalformedName("truncated LBF scenario name");
    return seg[i++];
  };

  std::string tok = next();
  if (tok.size() >= 2 && tok.back() == 's') {
    s.sight = parse_int(tok.substr(0, tok.size() - 1), "sight range");
    if (*s.sight < 1) throw MalformedName("sight range must be positive");
    tok = next();
  }

  auto x = tok.find('x');
  if (x == std::string::npos) throw MalformedName("missing <x_size>x<y_size> segment");
  s.grid_w = parse_int(tok.substr(0, x), "grid width");
  s.grid_h = parse_int(tok.substr(x + 1), "grid height");
  if (s.grid_w < 1 || s.grid_h < 1) throw MalformedName("grid sizes must be positive");
  if (s.sight && *s.sight > std::max(s.grid_w, s.grid_h))
    throw MalformedName("sight range exceeds grid size");

  tok = next();
  if (tok.size() < 2 || tok.back() != 'p') throw MalformedName("missing <n_agents>p segment");
  s.n_agents = parse_int(tok.substr(0, tok.size() - 1), "agent count");
  if (s.n_agents < 1) throw MalformedName("agent count must be positive");

  tok = next();
  if (tok.size() < 2 || tok.back() != 'f') throw MalformedName("missing <food>f segment");
  s.n_food = parse_int(tok.substr(0, tok.size() - 1), "food count");
  if (s.n_food < 1) throw MalformedName("LBF needs at least one food item");

  tok = next();
  if (tok == "coop") {
    s.coop = true;
    tok = next();
  }
  if (!is_version(tok)) throw MalformedName("missing version suffix");
  s.version = tok;
  if (i != seg.size()) throw MalformedName("trailing segments after version");
  return s;
}

Scenario parse_rware(const std::vector<std::string>& seg) {
  Scenario s;
  s.env_kind = EnvKind::RWARE;
  std::size_t i = 1;
  auto next = [&]() -> const std::string& {
    if (i >= seg.size()) throw MalformedName("truncated RWARE scenario name");
    return seg[i++];
  };

  std::string tok = next();
  if (tok == "tiny") {
    s.size_class = SizeClass::Tiny;
    s.grid_w = 11;
    s.grid_h = 11;
  } else if (tok == "small") {
    s.size_class = SizeClass::Small;
    s.grid_w = 11;
    s.grid_h = 20;
  } else if (tok == "medium") {
    s.size_class = SizeClass::Medium; // parsed, rejected at env construction
  } else if (tok == "large") {
    s.size_class = SizeClass::Large;
  } else {
    throw MalformedName("unknown RWARE size class: '" + tok + "'");
  }

  tok = next();
  if (tok.size() < 3 || tok.substr(tok.size() - 2) != "ag")
    throw MalformedName("missing <num_agents>ag segment");
  s.n_agents = parse_int(tok.substr(0, tok.size() - 2), "agent count");
  if (s.n_agents < 1) throw MalformedName("agent count must be positive");

  tok = next();
  if (!is_version(tok)) {
    s.difficulty = tok;
    tok = next();
  }
  if (!is_version(tok)) throw MalformedName("missing version suffix");
  s.version = tok;
  if (i != seg.size()) throw MalformedName("trailing segments after version");
  return s;
}

} // namespace

const char* size_class_name(SizeClass sc) {
  switch (sc) {
    case SizeClass::Tiny: return "tiny";
    case SizeClass::Small: return "small";
    case SizeClass::Medium: return "medium";
    case SizeClass::Large: return "large";
  }
  return "?";
}

Scenario parse_scenario(const std::string& name) {
  if (name.empty()) throw MalformedName("empty scenario name");
  auto seg = split(name, '-');
  if (seg[0] == "Foraging") return parse_lbf(seg);
  if (seg[0] == "rware") return parse_rware(seg);
  throw UnknownEnvPrefix("unknown environment prefix: '" + seg[0] + "'");
}

std::string render_scenario(const Scenario& s) {
  std::string out;
  if (s.env_kind == EnvKind::LBF) {
    out = "Foraging";
    if (s.sight) out += "-" + std::to_string(*s.sight) + "s";
    out += "-" + std::to_string(s.grid_w) + "x" + std::to_string(s.grid_h);
    out += "-" + std::to_string(s.n_agents) + "p";
    out += "-" + std::to_string(s.n_food) + "f";
    if (s.coop) out += "-coop";
  } else {
    out = "rware";
    out += "-";
    out += s.size_class ? size_class_name(*s.size_class) : "tiny";
    out += "-" + std::to_string(s.n_agents) + "ag";
    if (!s.difficulty.empty()) out += "-" + s.difficulty;
  }
  out += "-" + s.version;
  return out;
}

} // namespace marlens
