#include "mmp/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace mmp {

namespace {

constexpr std::string_view kCsvHeader = "algorithm,K,snr_db,err,mse,p_md,p_f,mean_candidates,mean_time_ms";

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("bad number '" + s + "' in CSV");
  return v;
}

// Minimal line chart; enough to eyeball the curves.
struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string line_chart(const std::vector<Series>& series, const std::string& title, const std::string& x_label,
                       const std::string& y_label) {
  constexpr double W = 640, H = 420, left = 70, right = 170, top = 40, bottom = 55;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (auto [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      x0 = std::min(x0, x), x1 = std::max(x1, x);
      y0 = std::min(y0, y), y1 = std::max(y1, y);
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x0 -= 1, x1 += 1;
  if (y1 == y0) y0 -= 1, y1 += 1;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad, y1 += pad;

  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * (W - left - right); };
  auto py = [&](double y) { return H - bottom - (y - y0) / (y1 - y0) * (H - top - bottom); };

  std::ostringstream svg;
  svg << std::fixed << std::setprecision(2);
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 "
      << W << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << W - left - right << "\" height=\""
      << H - top - bottom << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = x0 + (x1 - x0) * i / 5, yv = y0 + (y1 - y0) * i / 5;
    svg << "<text x=\"" << px(xv) << "\" y=\"" << H - bottom + 16 << "\" text-anchor=\"middle\">"
        << std::setprecision(3) << std::defaultfloat << xv << std::fixed << std::setprecision(2) << "</text>\n";
    svg << "<text x=\"" << left - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">"
        << std::setprecision(3) << std::defaultfloat << yv << std::fixed << std::setprecision(2) << "</text>\n";
  }
  svg << "<text x=\"" << left + (W - left - right) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">"
      << x_label << "</text>\n";
  svg << "<text x=\"16\" y=\"" << top + (H - top - bottom) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << top + (H - top - bottom) / 2 << ")\">" << y_label << "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* colour = kPalette[i % std::size(kPalette)];
    svg << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
    for (auto [x, y] : series[i].points)
      if (std::isfinite(x) && std::isfinite(y)) svg << px(x) << ',' << py(y) << ' ';
    svg << "\"/>\n";
    const double ly = top + 14 + 16 * static_cast<double>(i);
    svg << "<line x1=\"" << W - right + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << W - right + 30 << "\" y2=\""
        << ly - 4 << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << W - right + 34 << "\" y=\"" << ly << "\">" << series[i].name << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace

std::string to_csv(const std::vector<AggregateRow>& rows) {
  std::ostringstream out;
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    if (r.algorithm.find_first_of(",\n\"") != std::string::npos)
      throw std::invalid_argument("algorithm label '" + r.algorithm + "' cannot be written to CSV");
    out << r.algorithm << ',' << r.K << ',';
    if (r.snr_db) out << *r.snr_db; else out << "inf";
    out << ',' << r.err << ',' << r.mse << ',' << r.p_md << ',' << r.p_f << ',' << r.mean_candidates << ','
        << r.mean_time_ms << '\n';
  }
  return out.str();
}

std::vector<AggregateRow> parse_csv(std::string_view text) {
  std::vector<AggregateRow> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw std::invalid_argument("missing or unexpected CSV header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 9) throw std::invalid_argument("CSV row has " + std::to_string(f.size()) + " fields, want 9");
    AggregateRow r;
    r.algorithm = f[0];
    r.K = static_cast<Index>(std::stoll(f[1]));
    if (f[2] != "inf") r.snr_db = parse_double(f[2]);
    r.err = parse_double(f[3]);
    r.mse = parse_double(f[4]);
    r.p_md = parse_double(f[5]);
    r.p_f = parse_double(f[6]);
    r.mean_candidates = parse_double(f[7]);
    r.mean_time_ms = parse_double(f[8]);
    rows.push_back(std::move(r));
  }
  return rows;
}

double to_db(double value) { return 10.0 * std::log10(value); }

std::string err_plot_svg(const std::vector<AggregateRow>& rows) {
  std::map<std::string, Series> by_algo;
  std::vector<std::string> order;
  for (const auto& r : rows) {
    if (r.snr_db) continue;
    auto [it, fresh] = by_algo.try_emplace(r.algorithm, Series{r.algorithm, {}});
    if (fresh) order.push_back(r.algorithm);
    it->second.points.emplace_back(static_cast<double>(r.K), r.err);
  }
  std::vector<Series> series;
  for (const auto& name : order) {
    auto s = by_algo[name];
    std::sort(s.points.begin(), s.points.end());
    series.push_back(std::move(s));
  }
  return line_chart(series, "Exact recovery ratio", "K", "ERR");
}

std::string mse_plot_svg(const std::vector<AggregateRow>& rows) {
  std::map<std::string, Series> by_key;
  std::vector<std::string> order;
  for (const auto& r : rows) {
    if (!r.snr_db) continue;
    const std::string key = r.algorithm + " K=" + std::to_string(r.K);
    auto [it, fresh] = by_key.try_emplace(key, Series{key, {}});
    if (fresh) order.push_back(key);
    it->second.points.emplace_back(*r.snr_db, to_db(r.mse));
  }
  std::vector<Series> series;
  for (const auto& name : order) {
    auto s = by_key[name];
    std::sort(s.points.begin(), s.points.end());
    series.push_back(std::move(s));
  }
  return line_chart(series, "Mean squared error", "SNR (dB)", "MSE (dB)");
}

std::vector<std::filesystem::path> emit_results(const std::vector<AggregateRow>& rows,
                                                const std::filesystem::path& dir, bool plot) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto write = [&](const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << body;
    written.push_back(path);
  };
  write(dir / "results.csv", to_csv(rows));
  if (plot) {
    write(dir / "err.svg", err_plot_svg(rows));
    write(dir / "mse.svg", mse_plot_svg(rows));
  }
  return written;
}

}  // namespace mmp
