#include "bench/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "uld/errors.hpp"

namespace uld::bench {
namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double parse_number(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &pos);
  } catch (...) {
    throw ContractError("config: key '" + key + "' is not a number: " + v);
  }
  if (trim(v.substr(pos)).size() != 0)
    throw ContractError("config: key '" + key + "' is not a number: " + v);
  return out;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ContractError("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str());
}

Config Config::parse_string(const std::string& text) {
  Config c;
  c.raw_ = text;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ContractError("config: line " + std::to_string(lineno) + " is not key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ContractError("config: empty key or value on line " + std::to_string(lineno));
    if (c.values_.count(key))
      throw ContractError("config: duplicate key " + key);
    c.values_[key] = value;
  }
  return c;
}

const std::string* Config::find(const std::string& key) const {
  auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

void Config::echo(const std::string& key, const std::string& value) const {
  resolved_[key] = value;
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

double Config::number(const std::string& key) const {
  const std::string* v = find(key);
  if (!v) throw ContractError("config: missing required key " + key);
  const double out = parse_number(key, *v);
  echo(key, format_number(out));
  return out;
}

double Config::number(const std::string& key, double fallback) const {
  const std::string* v = find(key);
  const double out = v ? parse_number(key, *v) : fallback;
  echo(key, format_number(out));
  return out;
}

long Config::integer(const std::string& key) const {
  return static_cast<long>(number(key));
}

long Config::integer(const std::string& key, long fallback) const {
  return static_cast<long>(number(key, static_cast<double>(fallback)));
}

bool Config::boolean(const std::string& key, bool fallback) const {
  const std::string* v = find(key);
  bool out = fallback;
  if (v) {
    if (*v == "true" || *v == "on" || *v == "1")
      out = true;
    else if (*v == "false" || *v == "off" || *v == "0")
      out = false;
    else
      throw ContractError("config: key '" + key + "' is not a boolean: " + *v);
  }
  echo(key, out ? "true" : "false");
  return out;
}

std::string Config::str(const std::string& key) const {
  const std::string* v = find(key);
  if (!v) throw ContractError("config: missing required key " + key);
  echo(key, *v);
  return *v;
}

std::string Config::str(const std::string& key, const std::string& fallback) const {
  const std::string* v = find(key);
  const std::string out = v ? *v : fallback;
  echo(key, out);
  return out;
}

std::vector<double> Config::array(const std::string& key) const {
  const std::string* v = find(key);
  if (!v) throw ContractError("config: missing required key " + key);
  std::string s = trim(*v);
  if (s.size() < 2 || s.front() != '[' || s.back() != ']')
    throw ContractError("config: key '" + key + "' is not an array: " + s);
  s = s.substr(1, s.size() - 2);
  std::vector<double> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(parse_number(key, item));
  }
  std::string echoed = "[";
  for (std::size_t i = 0; i < out.size(); ++i)
    echoed += (i ? ", " : "") + format_number(out[i]);
  echoed += "]";
  echo(key, echoed);
  return out;
}

std::vector<double> Config::array(const std::string& key, const std::vector<double>& fallback) const {
  if (!has(key)) {
    std::string echoed = "[";
    for (std::size_t i = 0; i < fallback.size(); ++i)
      echoed += (i ? ", " : "") + format_number(fallback[i]);
    echoed += "]";
    echo(key, echoed);
    return fallback;
  }
  return array(key);
}

}  // namespace uld::bench
