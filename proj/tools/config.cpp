#include "config.hpp"

#include <openssl/evp.h>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace relqm::cli {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw ConfigError("line " + std::to_string(line) + ": " + what);
}

// Drops a trailing comment, respecting double-quoted strings.
std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  std::string clean;
  for (char c : s) {
    if (c != '_') clean += c;
  }
  char* end = nullptr;
  out = std::strtod(clean.c_str(), &end);
  return end == clean.c_str() + clean.size() && std::isfinite(out);
}

Value parse_value(const std::string& raw, std::size_t line) {
  const std::string s = trim(raw);
  if (s.empty()) fail(line, "missing value");
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"') fail(line, "unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
      if (s[i] == '\\' && i + 2 < s.size()) {
        const char n = s[++i];
        out += n == 'n' ? '\n' : n == 't' ? '\t' : n;
      } else {
        out += s[i];
      }
    }
    return out;
  }
  if (s == "true") return true;
  if (s == "false") return false;
  if (s.front() == '[') {
    if (s.back() != ']') fail(line, "unterminated array");
    std::vector<double> out;
    std::stringstream items(s.substr(1, s.size() - 2));
    std::string item;
    while (std::getline(items, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;  // trailing comma
      double v;
      if (!parse_number(item, v)) fail(line, "arrays hold numbers only, got '" + item + "'");
      out.push_back(v);
    }
    return out;
  }
  double v;
  if (!parse_number(s, v)) fail(line, "cannot parse value '" + s + "'");
  return v;
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
  }
  return true;
}

const char* type_name(const Value& v) {
  switch (v.index()) {
    case 0: return "number";
    case 1: return "boolean";
    case 2: return "string";
    default: return "array";
  }
}

}  // namespace

std::map<std::string, Value> parse_toml(const std::string& text) {
  std::map<std::string, Value> out;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']' || s.size() < 3 || s[1] == '[') fail(line, "malformed section header");
      section = trim(s.substr(1, s.size() - 2));
      if (!valid_key(section)) fail(line, "malformed section name '" + section + "'");
      continue;
    }
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected 'key = value'");
    const std::string key = trim(s.substr(0, eq));
    if (!valid_key(key)) fail(line, "malformed key '" + key + "'");
    if (section.empty()) fail(line, "key '" + key + "' outside any section");
    const std::string full = section + "." + key;
    if (out.count(full)) fail(line, "duplicate key " + full);
    out.emplace(full, parse_value(s.substr(eq + 1), line));
  }
  return out;
}

namespace {

using Setter = std::function<void(const Value&, const std::string&)>;

template <class T>
const T& expect(const Value& v, const std::string& key, const char* want) {
  const T* p = std::get_if<T>(&v);
  if (!p) throw ConfigError(key + ": expected " + want + ", got " + type_name(v));
  return *p;
}

Setter real(double& dst) {
  return [&dst](const Value& v, const std::string& k) { dst = expect<double>(v, k, "number"); };
}

Setter positive(double& dst) {
  return [&dst](const Value& v, const std::string& k) {
    dst = expect<double>(v, k, "number");
    if (!(dst > 0.0)) throw ConfigError(k + ": must be > 0");
  };
}

template <class I>
Setter integer(I& dst, double lo) {
  return [&dst, lo](const Value& v, const std::string& k) {
    const double x = expect<double>(v, k, "number");
    if (x != std::floor(x) || x < lo || x > 9.0e15) {
      throw ConfigError(k + ": expected an integer >= " + std::to_string(static_cast<long long>(lo)));
    }
    dst = static_cast<I>(x);
  };
}

Setter text(std::string& dst, std::set<std::string> allowed = {}) {
  return [&dst, allowed](const Value& v, const std::string& k) {
    dst = expect<std::string>(v, k, "string");
    if (!allowed.empty() && !allowed.count(dst)) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      throw ConfigError(k + ": '" + dst + "' is not one of {" + list + "}");
    }
  };
}

Setter array(std::vector<double>& dst) {
  return [&dst](const Value& v, const std::string& k) {
    dst = expect<std::vector<double>>(v, k, "array");
    if (dst.empty()) throw ConfigError(k + ": array is empty");
  };
}

}  // namespace

RunConfig parse_config(const std::string& text_in) {
  const auto values = parse_toml(text_in);
  RunConfig c;
  bool mass_seen = false;
  const std::map<std::string, Setter> schema{
      {"run.name", text(c.name)},
      {"run.module", text(c.module, {"evolve", "stationary", "transform", "madelung", "trajectories", "gravity",
                                     "verify-all", "converge"})},
      {"run.output", text(c.output)},
      {"run.seed", integer(c.seed, 0.0)},
      {"physics.mass",
       [&](const Value& v, const std::string& k) {
         positive(c.physics.mass)(v, k);
         mass_seen = true;
       }},
      {"physics.charge", real(c.physics.charge)},
      {"physics.newton_g",
       [&](const Value& v, const std::string& k) {
         real(c.physics.newton_g)(v, k);
         if (c.physics.newton_g < 0.0) throw ConfigError(k + ": must be >= 0");
       }},
      {"grid.length", positive(c.grid.length)},
      {"grid.points", integer(c.grid.points, 8.0)},
      {"grid.courant", positive(c.grid.courant)},
      {"grid.t_end", positive(c.grid.t_end)},
      {"grid.stride", integer(c.grid.stride, 1.0)},
      {"grid.boundary", text(c.grid.boundary, {"periodic", "dirichlet"})},
      {"potential.kind", text(c.potential.kind, {"none", "square_well", "gaussian"})},
      {"potential.depth", real(c.potential.depth)},
      {"potential.width", positive(c.potential.width)},
      {"potential.center", real(c.potential.center)},
      {"initial.kind", text(c.initial.kind, {"packet", "plane_wave"})},
      {"initial.momentum", real(c.initial.momentum)},
      {"initial.center", real(c.initial.center)},
      {"initial.width", positive(c.initial.width)},
      {"initial.branch",
       [&](const Value& v, const std::string& k) {
         const double b = expect<double>(v, k, "number");
         if (b != 1.0 && b != -1.0) throw ConfigError(k + ": must be +1 or -1");
         c.initial.branch = static_cast<int>(b);
       }},
      {"stationary.e_min", real(c.stationary.e_min)},
      {"stationary.e_max", real(c.stationary.e_max)},
      {"transform.weights", array(c.transform.weights)},
      {"transform.x_mean", array(c.transform.x_mean)},
      {"transform.x_sigma", array(c.transform.x_sigma)},
      {"transform.p_mean", array(c.transform.p_mean)},
      {"transform.p_sigma", array(c.transform.p_sigma)},
      {"transform.separation", real(c.transform.separation)},
      {"transform.x_min", real(c.transform.x_min)},
      {"transform.x_max", real(c.transform.x_max)},
      {"transform.points", integer(c.transform.points, 8.0)},
      {"trajectories.starts", array(c.trajectories.starts)},
      {"trajectories.tau_span", positive(c.trajectories.tau_span)},
      {"trajectories.dtau", positive(c.trajectories.dtau)},
      {"gravity.radius", positive(c.gravity.radius)},
      {"gravity.cells", integer(c.gravity.cells, 8.0)},
      {"gravity.depth", real(c.gravity.depth)},
      {"gravity.width", positive(c.gravity.width)},
      {"gravity.relaxation", positive(c.gravity.relaxation)},
      {"gravity.tolerance", positive(c.gravity.tolerance)},
      {"gravity.max_iterations", integer(c.gravity.max_iterations, 1.0)},
      {"converge.levels", integer(c.levels, 2.0)},
      {"tolerances.charge", positive(c.tolerances.charge)},
      {"tolerances.residual", positive(c.tolerances.residual)},
      {"tolerances.consistency", positive(c.tolerances.consistency)},
      {"tolerances.order", positive(c.tolerances.order)},
  };
  for (const auto& [key, value] : values) {
    const auto it = schema.find(key);
    if (it == schema.end()) throw ConfigError("unknown key " + key);
    it->second(value, key);
  }
  if (!mass_seen) throw ConfigError("missing required key physics.mass");

  const auto& t = c.transform;
  const std::size_t n = t.weights.size();
  if (t.x_mean.size() != n || t.x_sigma.size() != n || t.p_mean.size() != n || t.p_sigma.size() != n) {
    throw ConfigError("transform: weights, x_mean, x_sigma, p_mean and p_sigma need equal lengths");
  }
  if (!(t.x_max > t.x_min)) throw ConfigError("transform: x_max must exceed x_min");
  if (c.stationary.e_max < c.stationary.e_min) throw ConfigError("stationary: e_max must be >= e_min");
  if (c.gravity.relaxation > 1.0) throw ConfigError("gravity.relaxation: must lie in (0, 1]");
  c.hash = git_blob_hash(text_in);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string git_blob_hash(const std::string& bytes) {
  const std::string header = "blob " + std::to_string(bytes.size()) + '\0';
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr);
  EVP_DigestUpdate(ctx, header.data(), header.size());
  EVP_DigestUpdate(ctx, bytes.data(), bytes.size());
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

}  // namespace relqm::cli
