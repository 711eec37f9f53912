#include "mjpa/io.hpp"

#include "mjpa/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mjpa {

using nlohmann::json;

namespace {

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw InvalidInput("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json parse_json(const std::string &text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error &e) {
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t k = 0; k < stop; ++k) {
      if (text[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw SchemaError("line " + std::to_string(line) + ", column " + std::to_string(col),
                      "invalid JSON");
  }
}

double number(const json &v, const std::string &where) {
  if (!v.is_number())
    throw SchemaError(where, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x))
    throw SchemaError(where, "expected a finite number");
  return x;
}

RowVector row(const json &v, const std::string &where) {
  if (!v.is_array() || v.empty())
    throw SchemaError(where, "expected a nonempty array of numbers");
  RowVector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t k = 0; k < v.size(); ++k)
    out(static_cast<Eigen::Index>(k)) = number(v[k], where + "[" + std::to_string(k) + "]");
  return out;
}

Matrix matrix(const json &v, const std::string &where, std::size_t rows) {
  if (!v.is_array() || v.size() != rows)
    throw SchemaError(where, "expected an array of " + std::to_string(rows) + " rows");
  Matrix out;
  for (std::size_t k = 0; k < rows; ++k) {
    const RowVector r = row(v[k], where + "[" + std::to_string(k) + "]");
    if (k == 0)
      out.resize(static_cast<Eigen::Index>(rows), r.size());
    else if (r.size() != out.cols())
      throw SchemaError(where + "[" + std::to_string(k) + "]", "row length differs from row 0");
    out.row(static_cast<Eigen::Index>(k)) = r;
  }
  return out;
}

const json &field(const json &obj, const char *name) {
  if (!obj.contains(name))
    throw SchemaError(name, "required field is missing");
  return obj.at(name);
}

} // namespace

ModelSpec parse_model(const std::string &text) {
  const json doc = parse_json(text);
  if (!doc.is_object())
    throw SchemaError("(root)", "expected a JSON object");
  ModelSpec m;
  const json &p = field(doc, "p");
  if (!p.is_number_integer() || p.get<long long>() < 1)
    throw SchemaError("p", "expected a positive integer");
  m.p = p.get<std::size_t>();
  m.alpha = row(field(doc, "alpha"), "alpha");
  if (static_cast<std::size_t>(m.alpha.size()) != m.p)
    throw SchemaError("alpha", "length must equal p = " + std::to_string(m.p));
  m.S = matrix(field(doc, "S"), "S", m.p);
  if (static_cast<std::size_t>(m.S.cols()) != m.p)
    throw SchemaError("S", "must be p x p");
  if (doc.contains("family")) {
    if (!doc["family"].is_string())
      throw SchemaError("family", "expected a string");
    try {
      m.family = hazard_family_from_string(doc["family"].get<std::string>());
    } catch (const InvalidInput &e) {
      throw SchemaError("family", e.what());
    }
  }
  if (doc.contains("beta"))
    m.beta = number(doc["beta"], "beta");
  if (doc.contains("cap"))
    m.cap = number(doc["cap"], "cap");
  if (doc.contains("table")) {
    const json &t = doc["table"];
    if (!t.is_array())
      throw SchemaError("table", "expected an array of [t, value] pairs");
    for (std::size_t k = 0; k < t.size(); ++k) {
      const std::string where = "table[" + std::to_string(k) + "]";
      if (!t[k].is_array() || t[k].size() != 2)
        throw SchemaError(where, "expected a [t, value] pair");
      m.table.emplace_back(number(t[k][0], where + "[0]"), number(t[k][1], where + "[1]"));
    }
  }
  if (m.family == HazardFamily::table && m.table.empty())
    throw SchemaError("table", "required for family \"table\"");
  if (doc.contains("R"))
    m.R = matrix(doc["R"], "R", m.p);
  if (doc.contains("pi")) {
    m.pi = row(doc["pi"], "pi");
    if (static_cast<std::size_t>(m.pi->size()) != m.p)
      throw SchemaError("pi", "length must equal p = " + std::to_string(m.p));
  }
  return m;
}

ModelSpec load_model(const std::string &path) { return parse_model(read_file(path)); }

IPHModel ModelSpec::model() const {
  return separable_model(ProbVector(alpha),
                         SeparableSubIntensity(S, family, beta, cap, table));
}

ProbVector ModelSpec::initial() const { return ProbVector(pi ? *pi : alpha); }

RewardMatrix ModelSpec::rewards() const {
  if (!R)
    throw SchemaError("R", "reward matrix required for this operation");
  return RewardMatrix(*R);
}

std::string mixture_to_json(const ErlangMixture &m) {
  json doc;
  doc["n"] = m.rate;
  doc["weights"] = m.weights;
  doc["defect"] = m.defect;
  return doc.dump(2);
}

ErlangMixture mixture_from_json(const std::string &text) {
  const json doc = parse_json(text);
  if (!doc.is_object())
    throw SchemaError("(root)", "expected a JSON object");
  ErlangMixture m;
  m.rate = number(field(doc, "n"), "n");
  const json &w = field(doc, "weights");
  if (!w.is_array())
    throw SchemaError("weights", "expected an array of numbers");
  for (std::size_t k = 0; k < w.size(); ++k)
    m.weights.push_back(number(w[k], "weights[" + std::to_string(k) + "]"));
  m.defect = doc.contains("defect") ? number(doc["defect"], "defect") : 0.0;
  return m;
}

namespace {

double to_number(const std::string &s, const std::string &what) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(s, &used);
  } catch (const std::exception &) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !std::isfinite(x))
    throw InvalidInput(what + ": '" + s + "' is not a finite number");
  return x;
}

std::string trim(const std::string &s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos)
    return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

} // namespace

std::vector<double> parse_grid(const std::string &spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ':');)
    parts.push_back(trim(item));
  if (parts.size() != 3)
    throw InvalidInput("grid '" + spec + "' must look like start:stop:step");
  const double a = to_number(parts[0], "grid start");
  const double b = to_number(parts[1], "grid stop");
  const double h = to_number(parts[2], "grid step");
  if (!(h > 0.0) || b < a)
    throw InvalidInput("grid '" + spec + "' needs step > 0 and stop >= start");
  const auto count = static_cast<std::size_t>(std::floor((b - a) / h + 0.5));
  std::vector<double> out;
  out.reserve(count + 1);
  for (std::size_t k = 0; k <= count; ++k)
    out.push_back(a + static_cast<double>(k) * h);
  return out;
}

std::vector<double> parse_list(const std::string &spec) {
  std::vector<double> out;
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ',');)
    out.push_back(to_number(trim(item), "list entry"));
  if (out.empty())
    throw InvalidInput("empty list");
  return out;
}

std::vector<double> read_sample(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw InvalidInput("cannot open '" + path + "'");
  std::vector<double> out;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    line = trim(line);
    if (line.empty())
      continue;
    double x = 0.0;
    try {
      x = to_number(line, "line " + std::to_string(line_no));
    } catch (const InvalidInput &) {
      if (out.empty() && line_no == 1)
        continue;
      throw;
    }
    if (!(x > 0.0))
      throw InvalidInput("line " + std::to_string(line_no) + ": sample values must be positive");
    out.push_back(x);
  }
  if (out.empty())
    throw InvalidInput("'" + path + "' holds no observations");
  return out;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

} // namespace mjpa
