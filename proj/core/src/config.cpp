#include "reiterhom/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <memory>
#include <numbers>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "reiterhom/error.hpp"

namespace reiterhom::config {

namespace {

// Expression tree node; leaves are numbers or variables.
struct Node {
  enum class Op { number, var_x, var_y, neg, add, sub, mul, div, pow, call } op = Op::number;
  double value = 0.0;
  double (*fn)(double) = nullptr;
  std::unique_ptr<Node> lhs, rhs;

  double eval(const fields::Point& p) const {
    switch (op) {
      case Op::number: return value;
      case Op::var_x: return p[0];
      case Op::var_y: return p[1];
      case Op::neg: return -lhs->eval(p);
      case Op::add: return lhs->eval(p) + rhs->eval(p);
      case Op::sub: return lhs->eval(p) - rhs->eval(p);
      case Op::mul: return lhs->eval(p) * rhs->eval(p);
      case Op::div: return lhs->eval(p) / rhs->eval(p);
      case Op::pow: return std::pow(lhs->eval(p), rhs->eval(p));
      case Op::call: return fn(lhs->eval(p));
    }
    return 0.0;
  }
};

class Parser {
 public:
  explicit Parser(const std::string& text) : s_(text) {}

  std::unique_ptr<Node> parse() {
    auto n = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected character");
    return n;
  }

 private:
  [[noreturn]] void fail(const char* what) const {
    throw Error(Errc::config, fmt::format("expression '{}': {} at position {}", s_, what, pos_));
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  static std::unique_ptr<Node> binary(Node::Op op, std::unique_ptr<Node> a, std::unique_ptr<Node> b) {
    auto n = std::make_unique<Node>();
    n->op = op;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
  }

  std::unique_ptr<Node> expr() {
    auto n = term();
    for (;;) {
      if (eat('+')) {
        n = binary(Node::Op::add, std::move(n), term());
      } else if (eat('-')) {
        n = binary(Node::Op::sub, std::move(n), term());
      } else {
        return n;
      }
    }
  }
  std::unique_ptr<Node> term() {
    auto n = unary();
    for (;;) {
      if (eat('*')) {
        n = binary(Node::Op::mul, std::move(n), unary());
      } else if (eat('/')) {
        n = binary(Node::Op::div, std::move(n), unary());
      } else {
        return n;
      }
    }
  }
  std::unique_ptr<Node> unary() {
    if (eat('-')) return binary(Node::Op::neg, unary(), nullptr);
    if (eat('+')) return unary();
    auto base = primary();
    if (eat('^')) return binary(Node::Op::pow, std::move(base), unary());
    return base;
  }
  std::unique_ptr<Node> primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    auto n = std::make_unique<Node>();
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      n = expr();
      if (!eat(')')) fail("missing ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      try {
        n->value = std::stod(s_.substr(pos_), &used);
      } catch (const std::exception&) {
        fail("bad number");
      }
      pos_ += used;
      return n;
    }
    if (!std::isalpha(static_cast<unsigned char>(c))) fail("unexpected character");
    std::size_t end = pos_;
    while (end < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[end])) || s_[end] == '_')) ++end;
    const std::string name = s_.substr(pos_, end - pos_);
    pos_ = end;
    if (name == "x") {
      n->op = Node::Op::var_x;
    } else if (name == "y") {
      n->op = Node::Op::var_y;
    } else if (name == "pi") {
      n->value = std::numbers::pi;
    } else {
      static const std::map<std::string, double (*)(double)> functions{
          {"sin", [](double v) { return std::sin(v); }},   {"cos", [](double v) { return std::cos(v); }},
          {"tan", [](double v) { return std::tan(v); }},   {"exp", [](double v) { return std::exp(v); }},
          {"log", [](double v) { return std::log(v); }},   {"sqrt", [](double v) { return std::sqrt(v); }},
          {"abs", [](double v) { return std::abs(v); }},
      };
      const auto it = functions.find(name);
      if (it == functions.end()) fail(fmt::format("unknown name '{}'", name).c_str());
      if (!eat('(')) fail("expected '(' after function name");
      n->op = Node::Op::call;
      n->fn = it->second;
      n->lhs = expr();
      if (!eat(')')) fail("missing ')'");
    }
    return n;
  }

  std::string s_;
  std::size_t pos_ = 0;
};

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  s = s.substr(b, e - b + 1);
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) s = s.substr(1, s.size() - 2);
  return s;
}

double number(const std::string& key, const std::string& text) {
  double v = 0.0;
  try {
    v = parse_expression(text)({0.0, 0.0});
  } catch (const Error&) {
    throw Error(Errc::config, fmt::format("'{}' is not a number: '{}'", key, text));
  }
  if (!std::isfinite(v)) throw Error(Errc::config, fmt::format("'{}' is not finite: '{}'", key, text));
  return v;
}

int integer(const std::string& key, const std::string& text) {
  const double v = number(key, text);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw Error(Errc::config, fmt::format("'{}' must be an integer", key));
  return static_cast<int>(v);
}

fields::Point point(const std::string& key, const std::string& text, int dim) {
  const std::vector<double> v = parse_list(text);
  if (v.size() == 1) return {v[0], dim == 2 ? v[0] : 0.0};
  if (v.size() == 2 && dim == 2) return {v[0], v[1]};
  throw Error(Errc::config, fmt::format("'{}' needs 1 or {} numbers", key, dim));
}

}  // namespace

std::function<double(fields::Point)> parse_expression(const std::string& text) {
  std::shared_ptr<const Node> root = Parser(text).parse();
  return [root](fields::Point p) { return root->eval(p); };
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  const std::string t = trim(text);
  if (t.empty()) return out;
  for (;;) {
    const auto comma = t.find(',', start);
    const std::string piece = trim(t.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    out.push_back(number("list entry", piece));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

nfunc::NFunction parse_nfunction(const std::map<std::string, std::string>& fields) {
  const auto get = [&](const char* key) -> std::optional<double> {
    const auto it = fields.find(key);
    if (it == fields.end()) return std::nullopt;
    return number(key, it->second);
  };
  const auto kind = fields.find("kind");
  if (kind == fields.end()) throw Error(Errc::config, "nfunction needs a kind");
  const std::string k = trim(kind->second);
  for (const auto& [key, value] : fields) {
    const bool known = key == "kind" || ((k == "power" || k == "power_log") && key == "p") ||
                       (k == "power" && key == "scale");
    if (!known) throw Error(Errc::config, fmt::format("nfunction kind '{}' has no field '{}'", k, key));
  }
  if (k == "power") {
    const double p = get("p").value_or(2.0);
    const auto scale = get("scale");
    return scale ? nfunc::NFunction::power(p, *scale) : nfunc::NFunction::power(p);
  }
  if (k == "power_log") return nfunc::NFunction::power_log(get("p").value_or(1.0));
  if (k == "exp_minus_one") return nfunc::NFunction::exp_minus_one();
  throw Error(Errc::config, fmt::format("unknown nfunction kind '{}'", k));
}

nfunc::NFunction parse_nfunction_inline(const std::string& text) {
  std::string t = trim(text);
  if (t.size() < 2 || t.front() != '{' || t.back() != '}') {
    throw Error(Errc::config, fmt::format("nfunction must be written as {{ kind = ..., ... }}, got '{}'", text));
  }
  t = t.substr(1, t.size() - 2);
  std::map<std::string, std::string> fields;
  std::size_t start = 0;
  while (start <= t.size()) {
    const auto comma = t.find(',', start);
    const std::string item = t.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!trim(item).empty()) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw Error(Errc::config, fmt::format("nfunction field '{}' has no '='", item));
      fields[trim(item.substr(0, eq))] = trim(item.substr(eq + 1));
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return parse_nfunction(fields);
}

coeff::Coefficient ProblemConfig::build_coefficient() const {
  coeff::Coefficient c = coeff::builtin_problem(coefficient, params);
  if (c.dim != dim) {
    throw Error(Errc::config, fmt::format("problem '{}' is {}-dimensional but the domain has dim = {}", coefficient,
                                          c.dim, dim));
  }
  if (nfunction) c.phi = *nfunction;
  return c;
}

fields::Mesh ProblemConfig::macro_mesh() const {
  return dim == 1 ? fields::Mesh::interval(lower[0], upper[0], solver.macro_n)
                  : fields::Mesh::box(lower, upper, solver.macro_n);
}

void ProblemConfig::check() const {
  const SolverSettings& s = solver;
  if (dim != 1 && dim != 2) throw Error(Errc::config, "dim must be 1 or 2");
  for (int a = 0; a < dim; ++a) {
    if (!(upper[a] > lower[a])) throw Error(Errc::config, "domain upper corner must exceed the lower corner");
  }
  if (s.macro_n < 2 || s.cell_n < 2 || s.y_cells() < 2 || s.recon_n < 1 || s.recon_cell_n < 2 ||
      s.recon_y_cells() < 2) {
    throw Error(Errc::config, "mesh sizes must be at least 2 (recon_n at least 1)");
  }
  if (s.fine_factor < 4) throw Error(Errc::config, "fine_factor below 4 cannot resolve eps^2");
  if (!(s.tol > 0.0)) throw Error(Errc::config, "tol must be positive");
  if (s.table_points < 2 || s.table_points_r < 1) throw Error(Errc::config, "table needs 2 xi points and 1 r point");
  if (!(s.table_margin >= 0.2)) throw Error(Errc::config, "table_margin must be at least 0.2");
  if (s.jobs < 1) throw Error(Errc::config, "jobs must be positive");
  if (s.eps_list.empty()) throw Error(Errc::config, "eps list is empty");
  for (std::size_t i = 0; i < s.eps_list.size(); ++i) {
    const double e = s.eps_list[i];
    if (!(e > 0.0 && e <= 1.0)) throw Error(Errc::config, fmt::format("eps = {} is outside (0, 1]", e));
    if (i > 0 && !(e < s.eps_list[i - 1])) throw Error(Errc::config, "eps list must be strictly decreasing");
  }
  if (dim == 2) {
    if (s.eps_list.back() < 0.125) throw Error(Errc::config, "2D studies need eps >= 1/8");
    const int cap = fields::Mesh::kMaxCells2d;
    if (s.macro_n > cap || s.cell_n > cap || s.y_cells() > cap || s.recon_cell_n > cap || s.recon_y_cells() > cap) {
      throw Error(Errc::config, fmt::format("2D meshes are limited to {} cells per axis", cap));
    }
  }
}

ProblemConfig parse(std::istream& in, const std::string& origin) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(Errc::config, fmt::format("{}: {}", origin, e.message()));
  }
  ProblemConfig cfg;
  cfg.origin = origin;
  std::optional<std::string> domain_lower, domain_upper;
  for (const auto& [section, body] : tree) {
    if (body.empty() && body.data().empty()) continue;
    if (body.empty()) {
      if (section != "nfunction") throw Error(Errc::config, fmt::format("{}: unknown top-level key '{}'", origin, section));
      cfg.nfunction = parse_nfunction_inline(body.data());
      continue;
    }
    std::map<std::string, std::string> kv;
    for (const auto& [key, value] : body) kv[key] = trim(value.data());
    if (section == "nfunction") {
      cfg.nfunction = parse_nfunction(kv);
    } else if (section == "coefficient") {
      for (const auto& [key, value] : kv) {
        if (key == "name") {
          cfg.coefficient = value;
        } else if (key == "nfunction") {
          cfg.nfunction = parse_nfunction_inline(value);
        } else {
          cfg.params[key] = number(key, value);
        }
      }
    } else if (section == "domain") {
      for (const auto& [key, value] : kv) {
        if (key == "dim") {
          cfg.dim = integer(key, value);
        } else if (key == "lower") {
          domain_lower = value;
        } else if (key == "upper") {
          domain_upper = value;
        } else if (key == "f") {
          parse_expression(value);
          cfg.f = value;
        } else {
          throw Error(Errc::config, fmt::format("{}: unknown key '{}' in [domain]", origin, key));
        }
      }
    } else if (section == "solver") {
      SolverSettings& s = cfg.solver;
      for (const auto& [key, value] : kv) {
        if (key == "macro_n") s.macro_n = integer(key, value);
        else if (key == "cell_n") s.cell_n = integer(key, value);
        else if (key == "cell_n_y") s.cell_n_y = integer(key, value);
        else if (key == "eps") s.eps_list = parse_list(value);
        else if (key == "fine_factor") s.fine_factor = integer(key, value);
        else if (key == "tol") s.tol = number(key, value);
        else if (key == "samples") s.samples = static_cast<std::size_t>(std::max(0, integer(key, value)));
        else if (key == "seed") s.seed = static_cast<std::uint64_t>(std::max(0, integer(key, value)));
        else if (key == "recon_n") s.recon_n = integer(key, value);
        else if (key == "recon_cell_n") s.recon_cell_n = integer(key, value);
        else if (key == "recon_cell_n_y") s.recon_cell_n_y = integer(key, value);
        else if (key == "table_points") s.table_points = integer(key, value);
        else if (key == "table_points_r") s.table_points_r = integer(key, value);
        else if (key == "table_margin") s.table_margin = number(key, value);
        else if (key == "jobs") s.jobs = integer(key, value);
        else throw Error(Errc::config, fmt::format("{}: unknown key '{}' in [solver]", origin, key));
      }
    } else {
      throw Error(Errc::config, fmt::format("{}: unknown section [{}]", origin, section));
    }
  }
  if (domain_lower) cfg.lower = point("lower", *domain_lower, cfg.dim);
  if (domain_upper) cfg.upper = point("upper", *domain_upper, cfg.dim);
  if (cfg.dim == 1) cfg.lower[1] = cfg.upper[1] = 0.0;
  cfg.check();
  return cfg;
}

ProblemConfig load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, fmt::format("cannot open config '{}'", path));
  return parse(in, path);
}

}  // namespace reiterhom::config
