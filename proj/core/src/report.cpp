#include "ditherlab/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "ditherlab/error.hpp"
#include "ditherlab/prng.hpp"

namespace ditherlab {
namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

const char* curve_colour(std::string_view regulariser) {
  if (regulariser == "none") return "grey";
  if (regulariser == "dropout") return "green";
  if (regulariser == "dither") return "red";
  return "black";
}

template <typename T>
T parse_number(std::string_view field, std::size_t line) {
  T value{};
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw FormatError("CSV line " + std::to_string(line) + ": bad number '" + std::string(field) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

std::string format_csv(std::span<const LearningCurve> curves) {
  struct Row {
    const LearningCurve* curve;
    std::size_t epoch;
  };
  std::vector<Row> rows;
  for (const auto& c : curves) {
    for (std::size_t e = 1; e <= c.errors.size(); ++e) rows.push_back({&c, e});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.curve->regulariser, a.curve->batch_size, a.epoch, a.curve->seed) <
           std::tie(b.curve->regulariser, b.curve->batch_size, b.epoch, b.curve->seed);
  });
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += r.curve->regulariser;
    out += ',' + std::to_string(r.curve->batch_size);
    out += ',' + std::to_string(r.curve->seed);
    out += ',' + std::to_string(r.epoch);
    out += ',' + fixed(r.curve->errors[r.epoch - 1], 6);
    out += '\n';
  }
  return out;
}

void write_csv(std::span<const LearningCurve> curves, const std::filesystem::path& path) {
  write_text(path, format_csv(curves));
}

std::vector<LearningCurve> parse_csv(std::string_view text) {
  auto lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty() || lines.front() != kCsvHeader) throw FormatError("CSV: missing or unexpected header");

  using Key = std::tuple<std::string, std::size_t, std::uint64_t>;
  std::map<Key, std::map<std::size_t, double>> grouped;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split(lines[i], ',');
    if (fields.size() != 5) throw FormatError("CSV line " + std::to_string(i + 1) + ": expected 5 fields");
    Key key{std::string(fields[0]), parse_number<std::size_t>(fields[1], i + 1),
            parse_number<std::uint64_t>(fields[2], i + 1)};
    const auto epoch = parse_number<std::size_t>(fields[3], i + 1);
    const auto error = parse_number<double>(fields[4], i + 1);
    if (!grouped[key].emplace(epoch, error).second) {
      throw FormatError("CSV line " + std::to_string(i + 1) + ": duplicate epoch");
    }
  }

  std::vector<LearningCurve> curves;
  for (auto& [key, epochs] : grouped) {
    LearningCurve c{std::get<0>(key), std::get<1>(key), std::get<2>(key), {}, 0};
    std::size_t expected = 1;
    for (const auto& [epoch, error] : epochs) {
      if (epoch != expected++) {
        throw FormatError("CSV: curve " + c.regulariser + "/" + std::to_string(c.batch_size) +
                          " skips epoch " + std::to_string(expected - 1));
      }
      c.errors.push_back(error);
    }
    curves.push_back(std::move(c));
  }
  return curves;
}

std::vector<LearningCurve> read_csv(const std::filesystem::path& path) {
  try {
    return parse_csv(read_text(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string render_svg(std::span<const LearningCurve> curves) {
  constexpr double kPanelW = 360, kPanelH = 260;
  constexpr double kLeft = 50, kRight = 15, kTop = 30, kBottom = 40;
  constexpr double kHeader = 40;

  std::set<std::size_t> batch_sizes;
  std::size_t max_epoch = 1;
  double max_error = 0.0;
  for (const auto& c : curves) {
    batch_sizes.insert(c.batch_size);
    max_epoch = std::max(max_epoch, c.errors.size());
    for (double e : c.errors) max_error = std::max(max_error, e);
  }
  const double y_top = std::clamp(std::ceil(max_error * 10.0 - 1e-9) / 10.0, 0.1, 1.0);
  const std::size_t panels = batch_sizes.size();
  const std::size_t grid_cols = std::min<std::size_t>(2, std::max<std::size_t>(1, panels));
  const std::size_t grid_rows = std::max<std::size_t>(1, (panels + 1) / 2);
  const double width = kPanelW * static_cast<double>(grid_cols);
  const double height = kHeader + kPanelH * static_cast<double>(grid_rows);

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(width, 0) << "\" height=\""
      << fixed(height, 0) << "\" viewBox=\"0 0 " << fixed(width, 0) << ' ' << fixed(height, 0)
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"10\" y=\"18\" font-size=\"13\">Test error vs. full-sweep SGD iterations</text>\n";
  double legend_x = 10;
  for (const char* name : {"none", "dropout", "dither"}) {
    svg << "<line x1=\"" << fixed(legend_x, 0) << "\" y1=\"31\" x2=\"" << fixed(legend_x + 20, 0)
        << "\" y2=\"31\" stroke=\"" << curve_colour(name) << "\" stroke-width=\"2\"/>"
        << "<text x=\"" << fixed(legend_x + 25, 0) << "\" y=\"35\">" << name << "</text>\n";
    legend_x += 90;
  }

  std::size_t panel_index = 0;
  for (std::size_t bs : batch_sizes) {
    const double ox = kPanelW * static_cast<double>(panel_index % 2);
    const double oy = kHeader + kPanelH * static_cast<double>(panel_index / 2);
    const double plot_w = kPanelW - kLeft - kRight;
    const double plot_h = kPanelH - kTop - kBottom;
    const double x0 = ox + kLeft, y0 = oy + kTop;
    auto px = [&](double epoch) { return x0 + plot_w * (epoch - 1.0) / std::max(1.0, double(max_epoch) - 1.0); };
    auto py = [&](double err) { return y0 + plot_h * (1.0 - err / y_top); };

    svg << "<g class=\"panel\" data-batch-size=\"" << bs << "\">\n";
    svg << "<text x=\"" << fixed(x0 + plot_w / 2, 2) << "\" y=\"" << fixed(oy + 18, 2)
        << "\" text-anchor=\"middle\">batch size " << bs << "</text>\n";
    svg << "<rect x=\"" << fixed(x0, 2) << "\" y=\"" << fixed(y0, 2) << "\" width=\"" << fixed(plot_w, 2)
        << "\" height=\"" << fixed(plot_h, 2) << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
      const double err = y_top * t / 4.0;
      svg << "<text x=\"" << fixed(x0 - 5, 2) << "\" y=\"" << fixed(py(err) + 4, 2)
          << "\" text-anchor=\"end\">" << fixed(err, 2) << "</text>\n";
      const double epoch = 1.0 + (double(max_epoch) - 1.0) * t / 4.0;
      svg << "<text x=\"" << fixed(px(epoch), 2) << "\" y=\"" << fixed(y0 + plot_h + 15, 2)
          << "\" text-anchor=\"middle\">" << fixed(std::round(epoch), 0) << "</text>\n";
    }
    svg << "<text x=\"" << fixed(x0 + plot_w / 2, 2) << "\" y=\"" << fixed(y0 + plot_h + 32, 2)
        << "\" text-anchor=\"middle\">epoch</text>\n";

    for (const auto& c : curves) {
      if (c.batch_size != bs) continue;
      svg << "<polyline class=\"curve\" data-regulariser=\"" << c.regulariser << "\" data-seed=\"" << c.seed
          << "\" fill=\"none\" stroke=\"" << curve_colour(c.regulariser) << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t e = 0; e < c.errors.size(); ++e) {
        if (e) svg << ' ';
        svg << fixed(px(double(e + 1)), 2) << ',' << fixed(py(c.errors[e]), 2);
      }
      svg << "\"/>\n";
    }
    svg << "</g>\n";
    ++panel_index;
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_svg(std::span<const LearningCurve> curves, const std::filesystem::path& path) {
  write_text(path, render_svg(curves));
}

std::string format_summary_csv(std::span<const AggregateRow> rows) {
  std::string out = "regulariser,batch_size,runs,median_final_error,median_epochs_to_threshold\n";
  for (const auto& r : rows) {
    out += r.regulariser + ',' + std::to_string(r.batch_size) + ',' + std::to_string(r.runs) + ',' +
           fixed(r.median_final_error, 6) + ',' + fixed(r.median_epochs_to_threshold, 1) + '\n';
  }
  return out;
}

std::string format_journal(const ExperimentConfig& cfg, std::span<const std::uint64_t> seeds,
                           std::span<const std::filesystem::path> outputs) {
  nlohmann::ordered_json j;
  j["seeds"] = std::vector<std::uint64_t>(seeds.begin(), seeds.end());
  j["train_count"] = cfg.train_count;
  j["epochs"] = cfg.epochs;
  j["learning_rate"] = cfg.learning_rate;
  j["batch_sizes"] = cfg.batch_sizes;
  auto& regs = j["regularisers"] = nlohmann::ordered_json::array();
  for (const auto& r : cfg.regularisers) {
    regs.push_back({{"name", r.name()}, {"dropout_rate", r.dropout_rate}, {"dither_halfwidth", r.dither_halfwidth}});
  }
  j["data_dir"] = cfg.data_dir.string();
  auto& files = j["outputs"] = nlohmann::ordered_json::object();
  for (const auto& path : outputs) files[path.filename().string()] = "fnv1a64:" + hex64(fnv1a64(read_text(path)));
  return j.dump(2) + "\n";
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("error writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace ditherlab
