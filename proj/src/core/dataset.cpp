#include "core/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include "core/common.hpp"

namespace fs = std::filesystem;

namespace hdmann {

const char* to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "validation";
    case Split::kTest: return "test";
  }
  return "?";
}

namespace {

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "validation") return Split::kValidation;
  if (s == "test") return Split::kTest;
  throw ValidationError("unknown split: " + s);
}

struct Stroke {
  // Quadratic Bezier control points in normalized [0,1] coordinates.
  double x0, y0, x1, y1, x2, y2;
  double thickness;  // pixels
};

void draw_segment(Image& img, double x0, double y0, double x1, double y1, double th) {
  int size = img.size;
  double min_x = std::min(x0, x1) - th - 1, max_x = std::max(x0, x1) + th + 1;
  double min_y = std::min(y0, y1) - th - 1, max_y = std::max(y0, y1) + th + 1;
  int ax = std::max(0, static_cast<int>(std::floor(min_x)));
  int bx = std::min(size - 1, static_cast<int>(std::ceil(max_x)));
  int ay = std::max(0, static_cast<int>(std::floor(min_y)));
  int by = std::min(size - 1, static_cast<int>(std::ceil(max_y)));
  double dx = x1 - x0, dy = y1 - y0;
  double len2 = dx * dx + dy * dy;
  for (int y = ay; y <= by; ++y) {
    for (int x = ax; x <= bx; ++x) {
      double t = len2 == 0.0 ? 0.0 : ((x - x0) * dx + (y - y0) * dy) / len2;
      t = std::min(1.0, std::max(0.0, t));
      double px = x0 + t * dx, py = y0 + t * dy;
      double dist = std::sqrt((x - px) * (x - px) + (y - py) * (y - py));
      double v = th - dist;  // soft 1px falloff at the stroke edge
      if (v > 0.0) img.at(y, x) = std::min(1.0, img.at(y, x) + std::min(1.0, v));
    }
  }
}

void render_strokes(Image& img, const std::vector<Stroke>& strokes) {
  constexpr int kBezierSegments = 12;
  for (const auto& s : strokes) {
    double px = s.x0, py = s.y0;
    for (int i = 1; i <= kBezierSegments; ++i) {
      double t = static_cast<double>(i) / kBezierSegments;
      double mx = (1 - t) * (1 - t) * s.x0 + 2 * (1 - t) * t * s.x1 + t * t * s.x2;
      double my = (1 - t) * (1 - t) * s.y0 + 2 * (1 - t) * t * s.y1 + t * t * s.y2;
      draw_segment(img, px * (img.size - 1), py * (img.size - 1), mx * (img.size - 1),
                   my * (img.size - 1), s.thickness);
      px = mx;
      py = my;
    }
  }
}

}  // namespace

GlyphDataset generate_glyphs(int num_classes, int samples_per_class, uint64_t seed,
                             int image_size) {
  if (num_classes < 1 || samples_per_class < 1)
    throw ValidationError("generate_glyphs: counts must be positive");
  if (image_size < 8) throw ValidationError("generate_glyphs: image size too small");
  GlyphDataset ds;
  ds.image_size = image_size;
  ds.classes.resize(static_cast<size_t>(num_classes));
  for (int ci = 0; ci < num_classes; ++ci) {
    Rng rng = Rng::stream(seed, "glyph-class", static_cast<uint64_t>(ci));
    auto& cls = ds.classes[static_cast<size_t>(ci)];
    char name[32];
    std::snprintf(name, sizeof(name), "class_%04d", ci);
    cls.name = name;

    int num_strokes = 2 + rng.uniform_int(0, 2);
    std::vector<Stroke> skeleton(static_cast<size_t>(num_strokes));
    for (auto& s : skeleton) {
      s.x0 = 0.15 + 0.7 * rng.uniform();
      s.y0 = 0.15 + 0.7 * rng.uniform();
      s.x1 = 0.1 + 0.8 * rng.uniform();
      s.y1 = 0.1 + 0.8 * rng.uniform();
      s.x2 = 0.15 + 0.7 * rng.uniform();
      s.y2 = 0.15 + 0.7 * rng.uniform();
      s.thickness = 1.2 + 0.6 * rng.uniform();
    }

    cls.samples.reserve(static_cast<size_t>(samples_per_class));
    for (int si = 0; si < samples_per_class; ++si) {
      std::vector<Stroke> jittered = skeleton;
      double gx = rng.normal(0.0, 0.02), gy = rng.normal(0.0, 0.02);
      for (auto& s : jittered) {
        s.x0 += gx + rng.normal(0.0, 0.02);
        s.y0 += gy + rng.normal(0.0, 0.02);
        s.x1 += gx + rng.normal(0.0, 0.025);
        s.y1 += gy + rng.normal(0.0, 0.025);
        s.x2 += gx + rng.normal(0.0, 0.02);
        s.y2 += gy + rng.normal(0.0, 0.02);
        s.thickness = std::max(0.8, s.thickness + rng.normal(0.0, 0.12));
      }
      Image img = Image::zeros(image_size);
      render_strokes(img, jittered);
      cls.samples.push_back(std::move(img));
    }
  }

  // Split by class: 60% train / 40% test, then 15% of the train classes
  // reserved for validation.
  int train_end = std::max(1, static_cast<int>(std::lround(num_classes * 0.6)));
  int val_count = std::max(num_classes >= 8 ? 1 : 0,
                           static_cast<int>(std::lround(train_end * 0.15)));
  for (int ci = 0; ci < num_classes; ++ci) {
    auto& cls = ds.classes[static_cast<size_t>(ci)];
    if (ci < train_end - val_count) cls.split = Split::kTrain;
    else if (ci < train_end) cls.split = Split::kValidation;
    else cls.split = Split::kTest;
  }
  return ds;
}

std::vector<int> GlyphDataset::class_indices(Split split) const {
  std::vector<int> out;
  for (size_t i = 0; i < classes.size(); ++i)
    if (classes[i].split == split) out.push_back(static_cast<int>(i));
  return out;
}

Image augment(const Image& image, const AugmentSpec& spec, Rng& rng) {
  if (!spec.enabled) return image;
  if (spec.shift_std < 0.0 || spec.rot_std < 0.0)
    throw ValidationError("augment: negative std");
  double sx = rng.normal(0.0, spec.shift_std);
  double sy = rng.normal(0.0, spec.shift_std);
  double rot = rng.normal(0.0, spec.rot_std);
  int size = image.size;
  double c = (size - 1) / 2.0;
  double cosr = std::cos(rot), sinr = std::sin(rot);
  Image out = Image::zeros(size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      // Inverse map: undo the rotation about the centre, then the shift.
      double rx = cosr * (x - c) + sinr * (y - c) + c - sx;
      double ry = -sinr * (x - c) + cosr * (y - c) + c - sy;
      int x0 = static_cast<int>(std::floor(rx)), y0 = static_cast<int>(std::floor(ry));
      double fx = rx - x0, fy = ry - y0;
      double acc = 0.0;
      for (int dy = 0; dy <= 1; ++dy) {
        for (int dx = 0; dx <= 1; ++dx) {
          int xi = x0 + dx, yi = y0 + dy;
          if (xi < 0 || xi >= size || yi < 0 || yi >= size) continue;  // zero padding
          double w = (dx ? fx : 1.0 - fx) * (dy ? fy : 1.0 - fy);
          acc += w * image.at(yi, xi);
        }
      }
      out.at(y, x) = acc;
    }
  }
  return out;
}

Episode sample_episode(const GlyphDataset& dataset, Split split, int ways, int shots, int batch,
                       const AugmentSpec& augment_spec, Rng& rng) {
  if (ways < 1 || shots < 1 || batch < 1)
    throw ValidationError("sample_episode: counts must be positive");
  auto class_ids = dataset.class_indices(split);
  if (static_cast<int>(class_ids.size()) < ways)
    throw ValidationError("sample_episode: split has fewer classes than ways");
  int per_class = dataset.samples_per_class();
  if (per_class < shots + (batch + ways - 1) / ways)
    throw ValidationError("sample_episode: not enough samples per class");

  rng.shuffle(class_ids);
  class_ids.resize(static_cast<size_t>(ways));

  Episode ep;
  ep.ways = ways;
  ep.shots = shots;
  std::vector<std::pair<int, int>> query_pool;  // (relative label, sample index)
  for (int rel = 0; rel < ways; ++rel) {
    int ci = class_ids[static_cast<size_t>(rel)];
    std::vector<int> sample_ids(static_cast<size_t>(per_class));
    for (int i = 0; i < per_class; ++i) sample_ids[static_cast<size_t>(i)] = i;
    rng.shuffle(sample_ids);
    for (int s = 0; s < shots; ++s) {
      ep.support_images.push_back(
          dataset.classes[static_cast<size_t>(ci)].samples[static_cast<size_t>(sample_ids[static_cast<size_t>(s)])]);
      ep.support_labels.push_back(rel);
    }
    for (int s = shots; s < per_class; ++s)
      query_pool.emplace_back(rel, ci * per_class + sample_ids[static_cast<size_t>(s)]);
  }
  if (static_cast<int>(query_pool.size()) < batch)
    throw ValidationError("sample_episode: query pool smaller than batch");
  rng.shuffle(query_pool);
  query_pool.resize(static_cast<size_t>(batch));
  for (auto [rel, flat] : query_pool) {
    int ci = flat / per_class, si = flat % per_class;
    ep.query_images.push_back(dataset.classes[static_cast<size_t>(ci)].samples[static_cast<size_t>(si)]);
    ep.query_labels.push_back(rel);
  }

  if (augment_spec.enabled) {
    for (auto& img : ep.support_images) img = augment(img, augment_spec, rng);
    for (auto& img : ep.query_images) img = augment(img, augment_spec, rng);
  }
  return ep;
}

Image read_pgm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  auto next_token = [&is, &path]() {
    std::string tok;
    while (is) {
      int ch = is.get();
      if (ch == '#') {
        while (is && is.get() != '\n') {}
        continue;
      }
      if (ch == EOF) break;
      if (std::isspace(ch)) {
        if (!tok.empty()) return tok;
        continue;
      }
      tok += static_cast<char>(ch);
    }
    if (tok.empty()) throw IoError("malformed PGM header: " + path);
    return tok;
  };
  if (next_token() != "P5") throw IoError("not a binary PGM (P5): " + path);
  int w = std::stoi(next_token());
  int h = std::stoi(next_token());
  int maxval = std::stoi(next_token());
  if (w != h) throw IoError("PGM not square: " + path);
  if (maxval != 255) throw IoError("PGM must be 8-bit (maxval 255): " + path);
  std::vector<unsigned char> raw(static_cast<size_t>(w) * h);
  is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!is) throw IoError("truncated PGM: " + path);
  Image img = Image::zeros(w);
  for (size_t i = 0; i < raw.size(); ++i) img.px[i] = raw[i] / 255.0;
  return img;
}

void write_pgm(const Image& image, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path);
  os << "P5\n" << image.size << ' ' << image.size << "\n255\n";
  for (double v : image.px) {
    double clamped = std::min(1.0, std::max(0.0, v));
    os.put(static_cast<char>(std::lround(clamped * 255.0)));
  }
}

GlyphDataset load_image_directory(const std::string& path) {
  if (!fs::is_directory(path)) throw IoError("not a directory: " + path);

  std::map<std::string, Split> manifest;
  bool have_manifest = false;
  fs::path mpath = fs::path(path) / "manifest.tsv";
  if (fs::exists(mpath)) {
    have_manifest = true;
    std::ifstream ms(mpath);
    std::string line;
    while (std::getline(ms, line)) {
      if (line.empty()) continue;
      auto tab = line.find('\t');
      if (tab == std::string::npos) throw IoError("malformed manifest line: " + line);
      manifest[line.substr(0, tab)] = split_from_string(line.substr(tab + 1));
    }
  }

  std::vector<fs::path> class_dirs;
  for (const auto& entry : fs::directory_iterator(path))
    if (entry.is_directory()) class_dirs.push_back(entry.path());
  std::sort(class_dirs.begin(), class_dirs.end());
  if (class_dirs.empty()) throw ValidationError("empty dataset directory: " + path);

  GlyphDataset ds;
  ds.image_size = -1;
  size_t samples = 0;
  for (const auto& dir : class_dirs) {
    ClassData cls;
    cls.name = dir.filename().string();
    if (have_manifest) {
      auto it = manifest.find(cls.name);
      if (it == manifest.end()) throw ValidationError("class missing from manifest: " + cls.name);
      cls.split = it->second;
    } else {
      // Deterministic 60/40 class hash split, 15% of train to validation.
      uint64_t h = fnv1a64(cls.name);
      if (h % 100 < 60) {
        cls.split = (h / 100) % 100 < 15 ? Split::kValidation : Split::kTrain;
      } else {
        cls.split = Split::kTest;
      }
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
      if (entry.path().extension() == ".pgm") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      Image img = read_pgm(f.string());
      if (ds.image_size < 0) ds.image_size = img.size;
      if (img.size != ds.image_size)
        throw IoError("non-uniform image sizes in dataset: " + f.string());
      cls.samples.push_back(std::move(img));
    }
    if (cls.samples.empty()) throw ValidationError("class folder has no PGM files: " + cls.name);
    if (samples == 0) samples = cls.samples.size();
    if (cls.samples.size() != samples)
      throw ValidationError("class sample counts differ: " + cls.name);
    ds.classes.push_back(std::move(cls));
  }
  return ds;
}

void export_image_directory(const GlyphDataset& dataset, const std::string& path) {
  fs::create_directories(path);
  std::ofstream ms(fs::path(path) / "manifest.tsv", std::ios::binary);
  if (!ms) throw IoError("cannot write manifest in " + path);
  for (const auto& cls : dataset.classes) {
    ms << cls.name << '\t' << to_string(cls.split) << '\n';
    fs::path dir = fs::path(path) / cls.name;
    fs::create_directories(dir);
    for (size_t i = 0; i < cls.samples.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof(name), "sample_%04zu.pgm", i);
      write_pgm(cls.samples[i], (dir / name).string());
    }
  }
}

}  // namespace hdmann
