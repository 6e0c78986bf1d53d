#include "coopt/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace coopt {
namespace {

class LineScanner {
 public:
  explicit LineScanner(std::string_view text) : text_(text) {}

  std::map<std::string, int> run() {
    value("");
    return std::move(lines_);
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '\n') {
        ++line_;
      } else if (c != ' ' && c != '\t' && c != '\r') {
        return;
      }
      ++pos_;
    }
  }

  static std::string escape(const std::string& key) {
    std::string out;
    for (char c : key) {
      if (c == '~') {
        out += "~0";
      } else if (c == '/') {
        out += "~1";
      } else {
        out.push_back(c);
      }
    }
    return out;
  }

  std::string string_token() {
    std::string out;
    ++pos_;  // opening quote
    while (pos_ < text_.size() && text_[pos_] != '"') {
      if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) {
        out.push_back(text_[pos_ + 1]);
        pos_ += 2;
        continue;
      }
      out.push_back(text_[pos_++]);
    }
    ++pos_;  // closing quote
    return out;
  }

  void value(const std::string& pointer) {
    skip_ws();
    if (pos_ >= text_.size()) return;
    lines_.emplace(pointer, line_);
    const char c = text_[pos_];
    if (c == '{') {
      ++pos_;
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == '}') {
        ++pos_;
        return;
      }
      while (pos_ < text_.size()) {
        skip_ws();
        const std::string key = escape(string_token());
        skip_ws();
        ++pos_;  // ':'
        value(pointer + "/" + key);
        skip_ws();
        if (pos_ < text_.size() && text_[pos_++] == '}') return;
      }
    } else if (c == '[') {
      ++pos_;
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == ']') {
        ++pos_;
        return;
      }
      for (int index = 0; pos_ < text_.size(); ++index) {
        value(pointer + "/" + std::to_string(index));
        skip_ws();
        if (pos_ < text_.size() && text_[pos_++] == ']') return;
      }
    } else if (c == '"') {
      string_token();
    } else {
      while (pos_ < text_.size() &&
             std::string_view(",]} \t\r\n").find(text_[pos_]) ==
                 std::string_view::npos) {
        ++pos_;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  std::map<std::string, int> lines_;
};

int line_of(const std::map<std::string, int>& lines, std::string path) {
  while (true) {
    if (auto it = lines.find(path); it != lines.end()) return it->second;
    if (path.empty()) return 1;
    path.erase(path.rfind('/'));
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string anchored(const std::string& path, const std::string& text,
                     const std::vector<Issue>& issues) {
  const auto lines = locate_lines(text);
  std::ostringstream out;
  for (std::size_t i = 0; i < issues.size(); ++i) {
    if (i) out << '\n';
    out << path << ':' << line_of(lines, issues[i].path) << ": "
        << (issues[i].path.empty() ? "/" : issues[i].path) << ": "
        << issues[i].message;
  }
  return out.str();
}

template <typename Parse>
auto load_with(const std::string& path, Parse&& parse) {
  const std::string text = read_file(path);
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    int line = 1;
    int column = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw InputError(path + ":" + std::to_string(line) + ":" +
                     std::to_string(column) + ": syntax error: " + e.what());
  }
  try {
    return parse(doc);
  } catch (const ValidationError& e) {
    throw InputError(anchored(path, text, e.issues()));
  }
}

// Structural reader that accumulates issues instead of stopping at the first.
class Reader {
 public:
  std::vector<Issue> issues;

  void fail(const std::string& path, const std::string& message) {
    issues.push_back({path, message});
  }

  const Json* member(const Json& obj, const std::string& key,
                     const std::string& path, bool required = true) {
    if (!obj.is_object()) {
      fail(path, "must be an object");
      return nullptr;
    }
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) fail(path + "/" + key, "missing required field '" + key + "'");
      return nullptr;
    }
    return &*it;
  }

  bool number(const Json& v, const std::string& path, double& out) {
    if (!v.is_number()) {
      fail(path, "must be a number");
      return false;
    }
    out = v.get<double>();
    return true;
  }

  bool integer(const Json& v, const std::string& path, int& out) {
    if (!v.is_number_integer()) {
      fail(path, "must be an integer");
      return false;
    }
    const auto wide = v.get<long long>();
    if (wide < -1000000000LL || wide > 1000000000LL) {
      fail(path, "integer out of range");
      return false;
    }
    out = static_cast<int>(wide);
    return true;
  }

  bool string(const Json& v, const std::string& path, std::string& out) {
    if (!v.is_string()) {
      fail(path, "must be a string");
      return false;
    }
    out = v.get<std::string>();
    return true;
  }

  bool numbers(const Json& v, const std::string& path, std::vector<double>& out) {
    if (!v.is_array()) {
      fail(path, "must be an array of numbers");
      return false;
    }
    bool ok = true;
    for (std::size_t i = 0; i < v.size(); ++i) {
      double x = 0.0;
      ok = number(v[i], path + "/" + std::to_string(i), x) && ok;
      out.push_back(x);
    }
    return ok;
  }

  bool matrix(const Json& v, const std::string& path,
              std::vector<std::vector<double>>& out) {
    if (!v.is_array()) {
      fail(path, "must be an array of arrays");
      return false;
    }
    bool ok = true;
    for (std::size_t i = 0; i < v.size(); ++i) {
      ok = numbers(v[i], path + "/" + std::to_string(i), out.emplace_back()) && ok;
    }
    return ok;
  }

  void raise() {
    if (!issues.empty()) throw ValidationError(std::move(issues));
  }
};

AgentObjective read_objective(Reader& r, const Json& obj, const std::string& at,
                              Mode mode) {
  if (!obj.is_object()) {
    r.fail(at, "objective must be an object with 'dense' or 'pairwise'");
    return DenseEnergy{};
  }
  const bool has_dense = obj.contains("dense");
  const bool has_pairwise = obj.contains("pairwise");
  if (has_dense == has_pairwise) {
    r.fail(at, "objective must have exactly one of 'dense' or 'pairwise'");
    return DenseEnergy{};
  }
  if (has_dense) {
    DenseTable table;
    const std::string dat = at + "/dense";
    const Json& dense = obj["dense"];
    if (const Json* order = r.member(dense, "order", dat)) {
      if (!order->is_array()) {
        r.fail(dat + "/order", "must be an array of variable names");
      } else {
        for (std::size_t k = 0; k < order->size(); ++k) {
          r.string((*order)[k], dat + "/order/" + std::to_string(k),
                   table.order.emplace_back());
        }
      }
    }
    if (const Json* values = r.member(dense, "values", dat)) {
      r.numbers(*values, dat + "/values", table.values);
    }
    if (mode == Mode::kUtility) return DenseUtility{std::move(table)};
    return DenseEnergy{std::move(table)};
  }
  PairwiseEnergy pairwise;
  const std::string pat = at + "/pairwise";
  const Json& terms = obj["pairwise"];
  if (!terms.is_array()) {
    r.fail(pat, "must be an array of {with, table} terms");
    return pairwise;
  }
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const std::string tat = pat + "/" + std::to_string(t);
    PairwiseTerm& term = pairwise.terms.emplace_back();
    if (const Json* with = r.member(terms[t], "with", tat)) {
      r.string(*with, tat + "/with", term.with);
    }
    if (const Json* table = r.member(terms[t], "table", tat)) {
      r.matrix(*table, tat + "/table", term.table);
    }
  }
  return pairwise;
}

void put_csv(std::ostream& out, double v) { out << format_double(v); }

}  // namespace

std::map<std::string, int> locate_lines(std::string_view text) {
  return LineScanner(text).run();
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, end);
}

GameModel parse_problem(const Json& doc) {
  Reader r;
  GameModel model;
  if (!doc.is_object()) {
    r.fail("", "problem document must be an object");
    r.raise();
  }
  if (auto it = doc.find("hbar"); it != doc.end()) {
    r.number(*it, "/hbar", model.hbar);
  }
  std::string mode;
  if (const Json* m = r.member(doc, "mode", ""); m && r.string(*m, "/mode", mode)) {
    if (mode == "energy") {
      model.mode = Mode::kEnergy;
    } else if (mode == "utility") {
      model.mode = Mode::kUtility;
    } else {
      r.fail("/mode", "must be \"energy\" or \"utility\"");
    }
  }
  if (const Json* vars = r.member(doc, "variables", "")) {
    if (!vars->is_array()) {
      r.fail("/variables", "must be an array of {name, cardinality}");
    } else {
      for (std::size_t v = 0; v < vars->size(); ++v) {
        const std::string at = "/variables/" + std::to_string(v);
        DomainSpec& spec = model.variables.emplace_back();
        if (const Json* name = r.member((*vars)[v], "name", at)) {
          r.string(*name, at + "/name", spec.name);
        }
        if (const Json* card = r.member((*vars)[v], "cardinality", at)) {
          r.integer(*card, at + "/cardinality", spec.cardinality);
        }
      }
    }
  }
  if (const Json* agents = r.member(doc, "agents", "")) {
    if (!agents->is_array()) {
      r.fail("/agents", "must be an array of {name, acts_on, objective}");
    } else {
      for (std::size_t a = 0; a < agents->size(); ++a) {
        const std::string at = "/agents/" + std::to_string(a);
        const Json& entry = (*agents)[a];
        Agent& agent = model.agents.emplace_back();
        if (const Json* name = r.member(entry, "name", at)) {
          r.string(*name, at + "/name", agent.name);
        }
        if (const Json* on = r.member(entry, "acts_on", at)) {
          r.string(*on, at + "/acts_on", agent.acts_on);
        }
        if (const Json* obj = r.member(entry, "objective", at)) {
          agent.objective = read_objective(r, *obj, at + "/objective", model.mode);
        }
      }
    }
  }
  r.raise();
  return validate(std::move(model));
}

HermitianOperator parse_hamiltonian(const Json& doc) {
  Reader r;
  if (!doc.is_object()) {
    r.fail("", "Hamiltonian document must be an object");
    r.raise();
  }
  const int kinds = static_cast<int>(doc.contains("diagonal")) +
                    static_cast<int>(doc.contains("dense")) +
                    static_cast<int>(doc.contains("grid"));
  if (kinds != 1) {
    r.fail("", "expected exactly one of 'diagonal', 'dense' or 'grid'");
    r.raise();
  }
  try {
    if (doc.contains("diagonal")) {
      Vector d;
      r.numbers(doc["diagonal"], "/diagonal", d);
      r.raise();
      return HermitianOperator::diagonal(std::move(d));
    }
    if (doc.contains("dense")) {
      std::vector<std::vector<double>> rows;
      r.matrix(doc["dense"], "/dense", rows);
      r.raise();
      return HermitianOperator::dense(Matrix::from_rows(rows));
    }
    const Json& grid = doc["grid"];
    double xmin = 0.0, xmax = 0.0;
    int n = 0;
    Vector potential;
    if (const Json* v = r.member(grid, "xmin", "/grid")) r.number(*v, "/grid/xmin", xmin);
    if (const Json* v = r.member(grid, "xmax", "/grid")) r.number(*v, "/grid/xmax", xmax);
    if (const Json* v = r.member(grid, "n", "/grid")) r.integer(*v, "/grid/n", n);
    if (const Json* v = r.member(grid, "potential", "/grid")) {
      r.numbers(*v, "/grid/potential", potential);
    }
    r.raise();
    return build_grid_hamiltonian(xmin, xmax, n, potential);
  } catch (const ValidationError&) {
    throw;
  } catch (const Error& e) {
    const std::string where = doc.contains("diagonal") ? "/diagonal"
                              : doc.contains("dense")  ? "/dense"
                                                       : "/grid";
    throw ValidationError(std::vector<Issue>{{where, e.what()}});
  }
}

StrategyProfile parse_profile(const Json& doc, const GameModel& model) {
  Reader r;
  const Json* entries = r.member(doc, "profile", "");
  if (entries && !entries->is_array()) {
    r.fail("/profile", "must be an array of {agent, p}");
  }
  r.raise();
  StrategyProfile profile(model.num_agents());
  std::vector<bool> seen(model.num_agents(), false);
  for (std::size_t i = 0; i < entries->size(); ++i) {
    const std::string at = "/profile/" + std::to_string(i);
    std::string name;
    const Json* agent = r.member((*entries)[i], "agent", at);
    if (!agent || !r.string(*agent, at + "/agent", name)) continue;
    int index = -1;
    for (std::size_t a = 0; a < model.num_agents(); ++a) {
      if (model.agents[a].name == name) index = static_cast<int>(a);
    }
    if (index < 0) {
      r.fail(at + "/agent", "unknown agent '" + name + "'");
      continue;
    }
    if (seen[index]) {
      r.fail(at + "/agent", "agent '" + name + "' listed twice");
      continue;
    }
    seen[index] = true;
    if (const Json* p = r.member((*entries)[i], "p", at)) {
      r.numbers(*p, at + "/p", profile[index]);
    }
  }
  for (std::size_t a = 0; a < model.num_agents(); ++a) {
    if (!seen[a]) r.fail("/profile", "missing agent '" + model.agents[a].name + "'");
  }
  r.raise();
  try {
    check_profile(model, profile);
  } catch (const Error& e) {
    throw ValidationError(std::vector<Issue>{{"/profile", e.what()}});
  }
  return profile;
}

Json load_json(const std::string& path) {
  return load_with(path, [](const Json& doc) { return doc; });
}

GameModel load_problem(const std::string& path) {
  return load_with(path, [](const Json& doc) { return parse_problem(doc); });
}

HermitianOperator load_hamiltonian(const std::string& path) {
  return load_with(path, [](const Json& doc) { return parse_hamiltonian(doc); });
}

StrategyProfile load_profile(const std::string& path, const GameModel& model) {
  return load_with(path,
                   [&](const Json& doc) { return parse_profile(doc, model); });
}

Json problem_to_json(const GameModel& model) {
  Json doc;
  doc["hbar"] = model.hbar;
  doc["mode"] = model.mode == Mode::kEnergy ? "energy" : "utility";
  doc["variables"] = Json::array();
  for (const auto& v : model.variables) {
    doc["variables"].push_back({{"name", v.name}, {"cardinality", v.cardinality}});
  }
  doc["agents"] = Json::array();
  for (const auto& agent : model.agents) {
    Json objective;
    if (const auto* p = std::get_if<PairwiseEnergy>(&agent.objective)) {
      objective["pairwise"] = Json::array();
      for (const auto& term : p->terms) {
        objective["pairwise"].push_back({{"with", term.with}, {"table", term.table}});
      }
    } else {
      const DenseTable& t = std::holds_alternative<DenseEnergy>(agent.objective)
                                ? static_cast<const DenseTable&>(
                                      std::get<DenseEnergy>(agent.objective))
                                : std::get<DenseUtility>(agent.objective);
      objective["dense"] = {{"order", t.order}, {"values", t.values}};
    }
    doc["agents"].push_back(
        {{"name", agent.name}, {"acts_on", agent.acts_on}, {"objective", objective}});
  }
  return doc;
}

Json profile_to_json(const GameModel& model, const StrategyProfile& profile) {
  Json out = Json::array();
  for (std::size_t a = 0; a < profile.size(); ++a) {
    out.push_back({{"agent", model.agents[a].name}, {"p", profile[a]}});
  }
  return out;
}

Json field_to_json(const GameModel& model, const ExpectedReturnField& field) {
  Json out = Json::array();
  const auto linear = field.linear();
  for (std::size_t a = 0; a < linear.size(); ++a) {
    out.push_back({{"agent", model.agents[a].name}, {"psi", linear[a]}});
  }
  return out;
}

Json certificate_to_json(const GameModel& model, const EpsilonCertificate& cert) {
  Json agents = Json::array();
  for (std::size_t a = 0; a < cert.gains.size(); ++a) {
    agents.push_back({{"agent", model.agents[a].name},
                      {"gain", cert.gains[a]},
                      {"best_deviation", cert.best_deviation[a]}});
  }
  return {{"epsilon", cert.epsilon}, {"agents", agents}};
}

Json pure_profiles_to_json(const GameModel& model,
                           const std::vector<PureProfile>& profiles) {
  Json names = Json::array();
  for (const auto& agent : model.agents) names.push_back(agent.name);
  return {{"agents", names}, {"profiles", profiles}};
}

void write_iteration_trace(std::ostream& out, const IterationTrace& trace) {
  out << "step,max_change\n";
  for (const auto& s : trace) {
    out << s.step << ',';
    put_csv(out, s.max_change);
    out << '\n';
  }
}

void write_iteration_detail(std::ostream& out, const GameModel& model,
                            const IterationTrace& trace) {
  out << "step,agent,action,p,psi\n";
  for (const auto& s : trace) {
    const auto psi = s.field.linear();
    for (std::size_t a = 0; a < s.profile.size(); ++a) {
      for (std::size_t k = 0; k < s.profile[a].size(); ++k) {
        out << s.step << ',' << model.agents[a].name << ',' << k << ',';
        put_csv(out, s.profile[a][k]);
        out << ',';
        put_csv(out, psi[a][k]);
        out << '\n';
      }
    }
  }
}

void write_sweep_csv(std::ostream& out, const SweepReport& report) {
  out << "alpha,seed,converged,iterations,epsilon,welfare,global_hit\n";
  for (const auto& row : report.rows) {
    put_csv(out, row.alpha);
    out << ',' << row.seed << ',' << (row.converged ? "true" : "false") << ','
        << row.iterations << ',';
    if (row.epsilon) put_csv(out, *row.epsilon);
    out << ',';
    if (row.error.empty()) put_csv(out, row.welfare);
    out << ',';
    if (row.global_hit) out << (*row.global_hit ? "true" : "false");
    out << '\n';
  }
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory,
                          const std::vector<std::string>& names) {
  out << "t,agent,action,psi,lambda,residual\n";
  for (const auto& point : trajectory) {
    for (std::size_t a = 0; a < point.state.size(); ++a) {
      for (std::size_t k = 0; k < point.state[a].size(); ++k) {
        put_csv(out, point.t);
        out << ',' << names.at(a) << ',' << k << ',';
        put_csv(out, point.state[a][k]);
        out << ',';
        put_csv(out, point.stationarity[a].lambda);
        out << ',';
        put_csv(out, point.stationarity[a].residual);
        out << '\n';
      }
    }
  }
}

}  // namespace coopt
