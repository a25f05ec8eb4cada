#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <openssl/evp.h>

#include "error.hpp"

namespace hk::io {

using json = nlohmann::json;
namespace fs = std::filesystem;

// Shortest text that round-trips the double.
inline std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::vector<std::string>& header) : out_(path), path_(path) {
    if (!out_) throw error("cannot open " + path.string() + " for writing");
    row_strings(header);
  }

  template <class... Ts>
  void row(const Ts&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
    out_ << '\n';
  }

  void row_values(const std::vector<double>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << fmt(cells[i]);
    out_ << '\n';
  }

  void row_strings(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

  const fs::path& path() const { return path_; }

 private:
  static std::string cell(double x) { return fmt(x); }
  static std::string cell(int x) { return std::to_string(x); }
  static std::string cell(long x) { return std::to_string(x); }
  static std::string cell(unsigned long x) { return std::to_string(x); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }

  std::ofstream out_;
  fs::path path_;
};

inline void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

inline json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw invalid_input("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw invalid_input(path.string() + ": " + e.what());
  }
}

inline std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error("cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

inline std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct OutputFile {
  std::string name;
  std::string sha256;
};

struct RunManifest {
  std::string subcommand;
  json config;
  std::uint64_t master_seed = 0;
  std::string tool_version;
  std::string started, finished;
  std::vector<OutputFile> outputs;

  json to_json() const {
    json j;
    j["subcommand"] = subcommand;
    j["config"] = config;
    j["master_seed"] = master_seed;
    j["tool_version"] = tool_version;
    j["started"] = started;
    j["finished"] = finished;
    j["outputs"] = json::array();
    for (const auto& o : outputs) j["outputs"].push_back({{"file", o.name}, {"sha256", o.sha256}});
    return j;
  }

  static RunManifest from_json(const json& j) {
    RunManifest m;
    m.subcommand = j.at("subcommand").get<std::string>();
    m.config = j.at("config");
    m.master_seed = j.at("master_seed").get<std::uint64_t>();
    m.tool_version = j.value("tool_version", "");
    m.started = j.value("started", "");
    m.finished = j.value("finished", "");
    for (const auto& o : j.at("outputs")) m.outputs.push_back({o.at("file"), o.at("sha256")});
    return m;
  }
};

// ---------------------------------------------------------------------------
// Single-curve SVG chart

struct SvgSeries {
  std::vector<double> x, y;
  std::string label;
  std::string color = "#1f77b4";
  bool dashed = false;
};

struct SvgOptions {
  std::string title;
  std::string x_label = "t";
  std::string y_label;
  bool log_x = false;
  bool log_y = true;
  int width = 640, height = 420;
};

inline std::string xml_escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '&': o += "&amp;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

inline void write_svg(const fs::path& path, const std::vector<SvgSeries>& series, const SvgOptions& opt) {
  auto tx = [&](double v) { return opt.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return opt.log_y ? std::log10(v) : v; };
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!opt.log_x || x > 0.0) && (!opt.log_y || y > 0.0);
  };
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      x0 = std::min(x0, tx(s.x[i])), x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, ty(s.y[i])), y1 = std::max(y1, ty(s.y[i]));
    }
  if (!(x1 > x0)) x0 = 0.0, x1 = 1.0;
  if (!(y1 > y0)) y0 -= 1.0, y1 += 1.0;
  const double ml = 70, mr = 20, mt = 36, mb = 50;
  const double W = opt.width - ml - mr, H = opt.height - mt - mb;
  auto px = [&](double v) { return ml + (tx(v) - x0) / (x1 - x0) * W; };
  auto py = [&](double v) { return mt + (1.0 - (ty(v) - y0) / (y1 - y0)) * H; };

  std::ofstream out(path);
  if (!out) throw error("cannot open " + path.string() + " for writing");
  out << std::setprecision(6);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\"" << opt.height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W << "\" height=\"" << H
      << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = x0 + (x1 - x0) * k / 4.0, fy = y0 + (y1 - y0) * k / 4.0;
    const double sx = ml + W * k / 4.0, sy = mt + H * (1.0 - k / 4.0);
    const double lx = opt.log_x ? std::pow(10.0, fx) : fx, ly = opt.log_y ? std::pow(10.0, fy) : fy;
    out << "<text x=\"" << sx << "\" y=\"" << mt + H + 16 << "\" text-anchor=\"middle\">" << std::setprecision(3) << lx
        << "</text>\n";
    out << "<text x=\"" << ml - 6 << "\" y=\"" << sy + 4 << "\" text-anchor=\"end\">" << ly << "</text>\n"
        << std::setprecision(6);
    out << "<line x1=\"" << ml << "\" x2=\"" << ml + W << "\" y1=\"" << sy << "\" y2=\"" << sy
        << "\" stroke=\"#ddd\"/>\n";
  }
  out << "<text x=\"" << ml + W / 2 << "\" y=\"" << opt.height - 10 << "\" text-anchor=\"middle\">"
      << xml_escape(opt.x_label) << (opt.log_x ? " (log)" : "") << "</text>\n";
  out << "<text x=\"16\" y=\"" << mt + H / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << mt + H / 2
      << ")\">" << xml_escape(opt.y_label) << (opt.log_y ? " (log)" : "") << "</text>\n";
  out << "<text x=\"" << ml + W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(opt.title)
      << "</text>\n";
  int legend = 0;
  for (const auto& s : series) {
    out << "<path fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
        << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << " d=\"";
    bool pen = false;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!usable(s.x[i], s.y[i])) {
        pen = false;
        continue;
      }
      out << (pen ? " L" : " M") << px(s.x[i]) << ' ' << py(s.y[i]);
      pen = true;
    }
    out << "\"/>\n";
    if (!s.label.empty()) {
      const double ly = mt + 14 + 16 * legend++;
      out << "<line x1=\"" << ml + W - 150 << "\" x2=\"" << ml + W - 126 << "\" y1=\"" << ly - 4 << "\" y2=\"" << ly - 4
          << "\" stroke=\"" << s.color << "\"" << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
      out << "<text x=\"" << ml + W - 120 << "\" y=\"" << ly << "\">" << xml_escape(s.label) << "</text>\n";
    }
  }
  out << "</svg>\n";
}

}  // namespace hk::io
