#include "smseg/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>

#include "smseg/config_text.hpp"

namespace smseg {

std::vector<std::uint8_t> rasterize_polygon(const std::vector<Vec2>& vertices, int width,
                                            int height) {
  std::vector<std::uint8_t> raster(static_cast<std::size_t>(width) * height, 0);
  if (vertices.size() < 3) return raster;

  std::vector<double> xs;
  for (int y = 0; y < height; ++y) {
    xs.clear();
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      const Vec2& a = vertices[i];
      const Vec2& b = vertices[(i + 1) % vertices.size()];
      // Half-open span in y so a vertex on the scanline is counted once.
      if ((a.y() <= y && y < b.y()) || (b.y() <= y && y < a.y())) {
        xs.push_back(a.x() + (y - a.y()) * (b.x() - a.x()) / (b.y() - a.y()));
      }
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t i = 0; i + 1 < xs.size(); i += 2) {
      // Pixel center x is inside when the number of crossings to its right
      // is odd: [xs[i], xs[i+1]) half-open.
      const int x0 = std::max(0, static_cast<int>(std::ceil(xs[i])));
      const int x1 = std::min(width, static_cast<int>(std::ceil(xs[i + 1])));
      for (int x = x0; x < x1; ++x) raster[static_cast<std::size_t>(y) * width + x] = 1;
    }
  }
  return raster;
}

FrameScore score_frame(const ImageU8& mask, const std::vector<GroundTruthObject>& objects,
                       double range_gate) {
  FrameScore fs;
  fs.total_pixels = static_cast<long>(mask.width) * mask.height;
  if (!objects.empty()) fs.frame = objects.front().frame;

  const std::size_t n = mask.pixels.size();
  std::vector<std::uint8_t> covered(n, 0);

  for (const auto& obj : objects) {
    if (obj.frame != objects.front().frame) {
      throw std::invalid_argument("score_frame: objects from different frames");
    }
    ObjectScore os;
    os.frame = obj.frame;
    os.object_id = obj.object_id;
    os.klass = obj.klass;
    os.in_range = obj.ground_distance <= range_gate;
    const auto raster = rasterize_polygon(obj.polygon, mask.width, mask.height);
    for (std::size_t i = 0; i < n; ++i) {
      if (!raster[i]) continue;
      covered[i] = 1;
      if (mask.pixels[i]) {
        ++os.tp;
      } else {
        ++os.fn;
      }
    }
    os.detected = os.tp > 0;
    fs.objects.push_back(std::move(os));
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (mask.pixels[i] && !covered[i]) ++fs.fp_pixels;
  }
  fs.fp_ratio = fs.total_pixels > 0 ? static_cast<double>(fs.fp_pixels) / fs.total_pixels : 0.0;

  for (auto& os : fs.objects) {
    const long truth_pixels = os.tp + os.fn;
    os.tpr = truth_pixels > 0 ? static_cast<double>(os.tp) / truth_pixels : 0.0;
    const long union_pixels = truth_pixels + fs.fp_pixels;
    os.iou = union_pixels > 0 ? static_cast<double>(os.tp) / union_pixels : 0.0;
  }
  return fs;
}

EvalSummary aggregate_scores(std::vector<FrameScore> frames) {
  EvalSummary s;
  std::map<std::string, ClassSummary> classes;
  for (const auto& f : frames) {
    s.fp_pixels += f.fp_pixels;
    s.total_pixels += f.total_pixels;
    for (const auto& os : f.objects) {
      auto& c = classes[os.klass];
      c.klass = os.klass;
      ++c.object_frames;
      if (!os.in_range) continue;
      ++c.in_range;
      if (os.detected) ++c.detected;
      c.mean_tpr += os.tpr;
      c.mean_iou += os.iou;
    }
  }
  for (auto& [name, c] : classes) {
    if (c.in_range > 0) {
      c.detection_rate = static_cast<double>(c.detected) / c.in_range;
      c.mean_tpr /= c.in_range;
      c.mean_iou /= c.in_range;
    }
    s.classes.push_back(c);
  }
  s.fp_ratio = s.total_pixels > 0 ? static_cast<double>(s.fp_pixels) / s.total_pixels : 0.0;
  s.frames = std::move(frames);
  return s;
}

GridF32 detection_range_map(const std::vector<FrameScore>& frames,
                            const std::vector<GroundTruthObject>& truth,
                            const RangeMapSpec& spec) {
  if (!(spec.bin_size > 0.0) || !(spec.extent > spec.bin_size)) {
    throw std::invalid_argument("detection_range_map: bad bin size or extent");
  }
  std::map<std::pair<int, int>, const GroundTruthObject*> centroids;
  for (const auto& t : truth) centroids[{t.frame, t.object_id}] = &t;

  const int bins = static_cast<int>(std::ceil(2.0 * spec.extent / spec.bin_size));
  GridF32 map;
  map.width = bins;
  map.height = bins;
  map.values.assign(static_cast<std::size_t>(bins) * bins,
                    std::numeric_limits<float>::quiet_NaN());
  std::vector<int> total(map.values.size(), 0);
  std::vector<int> detected(map.values.size(), 0);

  for (const auto& f : frames) {
    for (const auto& os : f.objects) {
      const auto it = centroids.find({os.frame, os.object_id});
      if (it == centroids.end()) continue;
      const Vec2& c = it->second->centroid_vehicle;
      const int row = static_cast<int>(std::floor((spec.extent - c.x()) / spec.bin_size));
      const int col = static_cast<int>(std::floor((spec.extent - c.y()) / spec.bin_size));
      if (row < 0 || row >= bins || col < 0 || col >= bins) continue;
      const std::size_t i = map.index(col, row);
      ++total[i];
      if (os.detected) ++detected[i];
    }
  }
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    if (total[i] > 0) map.values[i] = static_cast<float>(detected[i]) / total[i];
  }
  return map;
}

void write_report(const EvalSummary& summary, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << "frames " << summary.frames.size() << '\n';
  out << "fp_pixels " << summary.fp_pixels << '\n';
  out << "total_pixels " << summary.total_pixels << '\n';
  out << "fp_ratio " << format_double(summary.fp_ratio) << '\n';
  for (const auto& c : summary.classes) {
    out << "class " << c.klass << " object_frames " << c.object_frames << " in_range " << c.in_range
        << " detected " << c.detected << " detection_rate " << format_double(c.detection_rate)
        << " mean_tpr " << format_double(c.mean_tpr) << " mean_iou " << format_double(c.mean_iou)
        << '\n';
  }
  if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace smseg
