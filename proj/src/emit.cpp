#include "msl/emit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace msl {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

void meta_comments(std::ostringstream& os, const RunMeta& m) {
  os << "# experiment: " << m.experiment << "\n";
  os << "# version: " << m.version << "\n";
  os << "# config: " << m.config_hash << "\n";
  os << "# seed: " << m.master_seed << "\n";
  os << "# replications: " << m.replications << "\n";
}

void warning_comments(std::ostringstream& os, const std::vector<std::string>& ws) {
  for (const std::string& w : ws) os << "# warning: " << csv_quote(w) << "\n";
}

ordered_json meta_json(const RunMeta& m) {
  ordered_json j;
  j["experiment"] = m.experiment;
  j["version"] = m.version;
  j["config_hash"] = m.config_hash;
  j["master_seed"] = m.master_seed;
  j["replications"] = m.replications;
  return j;
}

ordered_json value_to_json(const ConfigValue& v) {
  switch (v.kind) {
    case ConfigValue::Kind::Bool: return ordered_json(v.b);
    case ConfigValue::Kind::Int: return ordered_json(v.i);
    case ConfigValue::Kind::Float: return ordered_json(v.f);
    case ConfigValue::Kind::String: return ordered_json(v.s);
    case ConfigValue::Kind::Array: {
      ordered_json arr = ordered_json::array();
      for (const ConfigValue& e : v.items) arr.push_back(value_to_json(e));
      return arr;
    }
  }
  return ordered_json();
}

std::string render_config_scalar(const ordered_json& j) {
  if (j.is_boolean()) return j.get<bool>() ? "true" : "false";
  if (j.is_number_integer() || j.is_number_unsigned()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%lld", (long long)j.get<std::int64_t>());
    return buf;
  }
  if (j.is_number_float()) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", j.get<double>());
    std::string s = buf;
    // keep the float-ness visible so reparsing restores the same kind
    if (s.find_first_of(".eE") == std::string::npos &&
        s.find("inf") == std::string::npos && s.find("nan") == std::string::npos)
      s += ".0";
    return s;
  }
  if (j.is_string()) {
    std::string out = "\"";
    for (char c : j.get<std::string>()) {
      switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\t': out += "\\t"; break;
        default: out += c;
      }
    }
    out += '"';
    return out;
  }
  throw ConfigError("config json: unsupported value type");
}

std::string render_config_value(const ordered_json& j) {
  if (j.is_array()) {
    std::string out = "[";
    bool first = true;
    for (const auto& e : j) {
      if (!first) out += ", ";
      first = false;
      out += e.is_array() ? render_config_value(e) : render_config_scalar(e);
    }
    out += "]";
    return out;
  }
  return render_config_scalar(j);
}

}  // namespace

std::string format_sig(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

EmitFormat parse_format(const std::string& s) {
  if (s == "csv") return EmitFormat::Csv;
  if (s == "json") return EmitFormat::Json;
  if (s == "svg") return EmitFormat::Svg;
  throw ConfigError("unknown output format '" + s + "' (expected csv, json, or svg)");
}

const char* format_extension(EmitFormat f) {
  switch (f) {
    case EmitFormat::Csv: return "csv";
    case EmitFormat::Json: return "json";
    case EmitFormat::Svg: return "svg";
  }
  return "";
}

std::string to_csv(const RateReport& rep) {
  std::ostringstream os;
  meta_comments(os, rep.meta);
  os << "# sweep_axis: " << rep.sweep_axis << "\n";
  for (const RateFit& f : rep.fits)
    os << "# fit: " << f.procedure << " slope=" << format_sig(f.slope)
       << " band=" << format_sig(f.band) << " points=" << f.points_used << "\n";
  warning_comments(os, rep.warnings);
  os << "sweep,procedure,mean_excess,stderr,replications,clamped\n";
  for (const RateRow& r : rep.rows)
    os << format_sig(r.sweep) << "," << r.procedure << "," << format_sig(r.mean)
       << "," << format_sig(r.se) << "," << r.reps << "," << (r.clamped ? 1 : 0)
       << "\n";
  return os.str();
}

std::string to_json_text(const RateReport& rep) {
  ordered_json j;
  j["meta"] = meta_json(rep.meta);
  j["sweep_axis"] = rep.sweep_axis;
  j["rows"] = ordered_json::array();
  for (const RateRow& r : rep.rows) {
    ordered_json row;
    row["sweep"] = r.sweep;
    row["procedure"] = r.procedure;
    row["mean_excess"] = r.mean;
    row["stderr"] = r.se;
    row["replications"] = r.reps;
    row["clamped"] = r.clamped;
    j["rows"].push_back(std::move(row));
  }
  j["fits"] = ordered_json::array();
  for (const RateFit& f : rep.fits) {
    ordered_json fit;
    fit["procedure"] = f.procedure;
    fit["slope"] = f.slope;
    fit["band"] = f.band;
    fit["points_used"] = f.points_used;
    j["fits"].push_back(std::move(fit));
  }
  j["warnings"] = rep.warnings;
  return j.dump(2) + "\n";
}

std::string to_svg(const RateReport& rep) {
  // gather per-procedure series in first-appearance order
  std::vector<std::string> names;
  std::map<std::string, std::vector<std::pair<double, double>>> series;
  for (const RateRow& r : rep.rows) {
    if (!(r.sweep > 0.0) || !(r.mean > 0.0)) continue;
    if (!series.count(r.procedure)) names.push_back(r.procedure);
    series[r.procedure].emplace_back(std::log(r.sweep), std::log(r.mean));
  }
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"480\" "
        "viewBox=\"0 0 720 480\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"720\" height=\"480\" fill=\"white\"/>\n";
  os << "<text x=\"360\" y=\"24\" text-anchor=\"middle\" font-family=\"monospace\" "
        "font-size=\"14\">"
     << rep.meta.experiment << " (config " << rep.meta.config_hash << ")</text>\n";
  if (names.empty()) {
    os << "<text x=\"360\" y=\"240\" text-anchor=\"middle\" font-family=\"monospace\" "
          "font-size=\"14\">no positive data to plot</text>\n</svg>\n";
    return os.str();
  }
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& name : names)
    for (const auto& pt : series[name]) {
      xmin = std::min(xmin, pt.first);
      xmax = std::max(xmax, pt.first);
      ymin = std::min(ymin, pt.second);
      ymax = std::max(ymax, pt.second);
    }
  if (xmax - xmin < 1e-9) { xmin -= 1.0; xmax += 1.0; }
  if (ymax - ymin < 1e-9) { ymin -= 1.0; ymax += 1.0; }
  const double left = 80, right = 690, top = 50, bottom = 420;
  auto sx = [&](double v) { return left + (v - xmin) / (xmax - xmin) * (right - left); };
  auto sy = [&](double v) { return bottom - (v - ymin) / (ymax - ymin) * (bottom - top); };
  auto px = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  os << "<rect x=\"" << px(left) << "\" y=\"" << px(top) << "\" width=\""
     << px(right - left) << "\" height=\"" << px(bottom - top)
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  // x ticks at the distinct sweep values
  std::vector<double> xt;
  for (const RateRow& r : rep.rows)
    if (r.sweep > 0.0 &&
        std::find(xt.begin(), xt.end(), r.sweep) == xt.end())
      xt.push_back(r.sweep);
  std::sort(xt.begin(), xt.end());
  for (double v : xt) {
    const double X = sx(std::log(v));
    os << "<line x1=\"" << px(X) << "\" y1=\"" << px(bottom) << "\" x2=\"" << px(X)
       << "\" y2=\"" << px(bottom + 5) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << px(X) << "\" y=\"" << px(bottom + 20)
       << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"11\">"
       << format_sig(v) << "</text>\n";
  }
  os << "<text x=\"" << px((left + right) / 2) << "\" y=\"460\" text-anchor=\"middle\" "
        "font-family=\"monospace\" font-size=\"12\">"
     << rep.sweep_axis << " (log scale)</text>\n";
  // y ticks at powers of ten
  const int k_lo = int(std::ceil(ymin / std::log(10.0) - 1e-9));
  const int k_hi = int(std::floor(ymax / std::log(10.0) + 1e-9));
  for (int k = k_lo; k <= k_hi; ++k) {
    const double Y = sy(double(k) * std::log(10.0));
    os << "<line x1=\"" << px(left - 5) << "\" y1=\"" << px(Y) << "\" x2=\"" << px(left)
       << "\" y2=\"" << px(Y) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << px(left - 8) << "\" y=\"" << px(Y + 4)
       << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"11\">1e" << k
       << "</text>\n";
  }
  os << "<text x=\"20\" y=\"" << px((top + bottom) / 2)
     << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\" "
        "transform=\"rotate(-90 20 "
     << px((top + bottom) / 2) << ")\">mean excess risk (log scale)</text>\n";
  const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                           "#ff7f0e", "#8c564b"};
  const std::size_t ncol = sizeof(palette) / sizeof(palette[0]);
  for (std::size_t si = 0; si < names.size(); ++si) {
    const char* color = palette[si % ncol];
    const auto& pts = series[names[si]];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i) os << " ";
      os << px(sx(pts[i].first)) << "," << px(sy(pts[i].second));
    }
    os << "\"/>\n";
    for (const auto& pt : pts)
      os << "<circle cx=\"" << px(sx(pt.first)) << "\" cy=\"" << px(sy(pt.second))
         << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    // legend
    const double ly = top + 16.0 + 16.0 * double(si);
    os << "<line x1=\"" << px(right - 150) << "\" y1=\"" << px(ly - 4) << "\" x2=\""
       << px(right - 130) << "\" y2=\"" << px(ly - 4) << "\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << px(right - 124) << "\" y=\"" << px(ly)
       << "\" font-family=\"monospace\" font-size=\"11\">" << names[si] << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string to_csv(const AsymmetryReport& rep) {
  std::ostringstream os;
  meta_comments(os, rep.meta);
  os << "# swap_target: " << (rep.swap_target ? 1 : 0) << "\n";
  os << "# n_P: " << rep.n_P << "\n";
  os << "# n_D: " << rep.n_D << "\n";
  warning_comments(os, rep.warnings);
  os << "learner,target_excess_mean,target_excess_se,source_excess_mean,"
        "source_excess_se,wrong_at_x1_freq,wrong_at_x1_se\n";
  for (const AsymmetryRow& r : rep.rows)
    os << r.learner << "," << format_sig(r.target_excess_mean) << ","
       << format_sig(r.target_excess_se) << "," << format_sig(r.source_excess_mean)
       << "," << format_sig(r.source_excess_se) << ","
       << format_sig(r.wrong_at_x1_freq) << "," << format_sig(r.wrong_at_x1_se)
       << "\n";
  return os.str();
}

std::string to_json_text(const AsymmetryReport& rep) {
  ordered_json j;
  j["meta"] = meta_json(rep.meta);
  j["swap_target"] = rep.swap_target;
  j["n_P"] = rep.n_P;
  j["n_D"] = rep.n_D;
  j["rows"] = ordered_json::array();
  for (const AsymmetryRow& r : rep.rows) {
    ordered_json row;
    row["learner"] = r.learner;
    row["target_excess_mean"] = r.target_excess_mean;
    row["target_excess_se"] = r.target_excess_se;
    row["source_excess_mean"] = r.source_excess_mean;
    row["source_excess_se"] = r.source_excess_se;
    row["wrong_at_x1_freq"] = r.wrong_at_x1_freq;
    row["wrong_at_x1_se"] = r.wrong_at_x1_se;
    j["rows"].push_back(std::move(row));
  }
  j["warnings"] = rep.warnings;
  return j.dump(2) + "\n";
}

std::string to_csv(const AdaptivityReport& rep) {
  std::ostringstream os;
  meta_comments(os, rep.meta);
  os << "# procedures_run: " << (rep.procedures_run ? 1 : 0) << "\n";
  os << "# flip_reps: " << rep.flip_reps << "\n";
  os << "# flip_freq: " << format_sig(rep.flip_freq) << "\n";
  os << "# flip_se: " << format_sig(rep.flip_se) << "\n";
  os << "# flip_floor: " << format_sig(rep.flip_floor) << "\n";
  os << "# rank_rate_ceiling: " << format_sig(rep.rank_rate_ceiling) << "\n";
  warning_comments(os, rep.warnings);
  os << "procedure,target_excess_mean,target_excess_se,wrong_at_x1_freq,"
        "wrong_at_x1_se\n";
  for (const AdaptivityRow& r : rep.rows)
    os << r.procedure << "," << format_sig(r.target_excess_mean) << ","
       << format_sig(r.target_excess_se) << "," << format_sig(r.wrong_at_x1_freq)
       << "," << format_sig(r.wrong_at_x1_se) << "\n";
  return os.str();
}

std::string to_json_text(const AdaptivityReport& rep) {
  ordered_json j;
  j["meta"] = meta_json(rep.meta);
  j["procedures_run"] = rep.procedures_run;
  j["rows"] = ordered_json::array();
  for (const AdaptivityRow& r : rep.rows) {
    ordered_json row;
    row["procedure"] = r.procedure;
    row["target_excess_mean"] = r.target_excess_mean;
    row["target_excess_se"] = r.target_excess_se;
    row["wrong_at_x1_freq"] = r.wrong_at_x1_freq;
    row["wrong_at_x1_se"] = r.wrong_at_x1_se;
    j["rows"].push_back(std::move(row));
  }
  j["flip_reps"] = rep.flip_reps;
  j["flip_freq"] = rep.flip_freq;
  j["flip_se"] = rep.flip_se;
  j["flip_floor"] = rep.flip_floor;
  j["rank_rate_ceiling"] = rep.rank_rate_ceiling;
  j["warnings"] = rep.warnings;
  return j.dump(2) + "\n";
}

std::string to_csv(const BoundsReport& rep) {
  std::ostringstream os;
  meta_comments(os, rep.meta);
  os << "bound,value,argmin_t,per_t_terms\n";
  for (const BoundsRow& r : rep.rows) {
    os << r.name << "," << format_sig(r.value) << "," << r.argmin_t << ",";
    std::string terms;
    for (std::size_t i = 0; i < r.per_t_terms.size(); ++i) {
      if (i) terms += ";";
      terms += format_sig(r.per_t_terms[i]);
    }
    os << csv_quote(terms) << "\n";
  }
  return os.str();
}

std::string to_json_text(const BoundsReport& rep) {
  ordered_json j;
  j["meta"] = meta_json(rep.meta);
  j["rows"] = ordered_json::array();
  for (const BoundsRow& r : rep.rows) {
    ordered_json row;
    row["bound"] = r.name;
    row["value"] = r.value;
    row["argmin_t"] = r.argmin_t;
    row["per_t_terms"] = r.per_t_terms;
    j["rows"].push_back(std::move(row));
  }
  return j.dump(2) + "\n";
}

std::string to_csv(const PackReport& rep) {
  std::ostringstream os;
  meta_comments(os, rep.meta);
  os << "# d: " << rep.d << "\n";
  os << "# min_distance: " << rep.min_distance << "\n";
  os << "# size: " << rep.vectors.size() << "\n";
  os << "# distance_verified: " << (rep.distance_verified ? 1 : 0) << "\n";
  os << "index,vector\n";
  for (std::size_t i = 0; i < rep.vectors.size(); ++i) {
    os << i << ",";
    for (std::int8_t c : rep.vectors[i]) os << (c > 0 ? '+' : '-');
    os << "\n";
  }
  return os.str();
}

std::string to_json_text(const PackReport& rep) {
  ordered_json j;
  j["meta"] = meta_json(rep.meta);
  j["d"] = rep.d;
  j["min_distance"] = rep.min_distance;
  j["size"] = rep.vectors.size();
  j["distance_verified"] = rep.distance_verified;
  j["vectors"] = ordered_json::array();
  for (const auto& v : rep.vectors) {
    std::string s;
    for (std::int8_t c : v) s += (c > 0 ? '+' : '-');
    j["vectors"].push_back(std::move(s));
  }
  return j.dump(2) + "\n";
}

std::string to_csv(const ValidateReport& rep) {
  std::ostringstream os;
  meta_comments(os, rep.meta);
  warning_comments(os, rep.warnings);
  os << "family,shared_optimum,transfer_ok,bernstein_ok,detail\n";
  os << rep.family << "," << (rep.shared_optimum ? 1 : 0) << ","
     << (rep.transfer_ok ? 1 : 0) << "," << (rep.bernstein_ok ? 1 : 0) << ","
     << csv_quote(rep.detail) << "\n";
  return os.str();
}

std::string to_json_text(const ValidateReport& rep) {
  ordered_json j;
  j["meta"] = meta_json(rep.meta);
  j["family"] = rep.family;
  j["shared_optimum"] = rep.shared_optimum;
  j["transfer_ok"] = rep.transfer_ok;
  j["bernstein_ok"] = rep.bernstein_ok;
  j["detail"] = rep.detail;
  j["warnings"] = rep.warnings;
  j["ok"] = rep.ok();
  return j.dump(2) + "\n";
}

std::string config_to_json_text(const Config& cfg) {
  ordered_json j;
  for (const Config::Section& s : cfg.sections()) {
    ordered_json sec;
    for (const Config::Entry& e : s.entries) sec[e.key] = value_to_json(e.value);
    j[s.name] = std::move(sec);
  }
  return j.dump(2) + "\n";
}

Config config_from_json_text(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config json: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config json: top level must be an object");
  std::ostringstream os;
  for (const auto& [name, sec] : j.items()) {
    if (!sec.is_object())
      throw ConfigError("config json: section '" + name + "' must be an object");
    if (!name.empty()) os << "[" << name << "]\n";
    for (const auto& [key, value] : sec.items())
      os << key << " = " << render_config_value(value) << "\n";
  }
  return Config::parse_string(os.str(), "<json>");
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace msl
