#pragma once

#include <string>
#include <vector>

#include "core/rng.hpp"
#include "core/types.hpp"

namespace hdmann {

enum class Split { kTrain, kValidation, kTest };

const char* to_string(Split s);

struct AugmentSpec {
  double shift_std = 2.5;                 // pixels
  double rot_std = 0.2617993877991494;    // pi/12 radians
  bool enabled = true;
};

struct ClassData {
  std::string name;
  Split split = Split::kTrain;
  std::vector<Image> samples;
};

// Few-shot glyph dataset: classes are disjoint across splits; every class
// carries the same number of samples.
struct GlyphDataset {
  int image_size = 32;
  std::vector<ClassData> classes;

  std::vector<int> class_indices(Split split) const;
  int samples_per_class() const {
    return classes.empty() ? 0 : static_cast<int>(classes[0].samples.size());
  }
};

// Procedural stand-in for a handwritten-character corpus: each class is a
// random stroke skeleton, samples are jittered renderings of it. Fully
// deterministic for a fixed seed; every class draws from its own stream.
GlyphDataset generate_glyphs(int num_classes, int samples_per_class, uint64_t seed,
                             int image_size = 32);

// Random shift (bilinear, zero padding) followed by rotation about the
// centre. Disabled spec returns the input untouched.
Image augment(const Image& image, const AugmentSpec& spec, Rng& rng);

// Draws m classes, n support shots each, then b queries from the remaining
// samples of the same classes (supports never reappear as queries).
Episode sample_episode(const GlyphDataset& dataset, Split split, int ways, int shots, int batch,
                       const AugmentSpec& augment_spec, Rng& rng);

// Class-per-subdirectory tree of 32x32 8-bit P5 PGM files. Splits come from
// a `manifest.tsv` (class_id<TAB>split) when present, otherwise from a
// deterministic class-name hash (60/40 train/test, 15% of train to
// validation).
GlyphDataset load_image_directory(const std::string& path);

// Writes the same layout (PGM + manifest).
void export_image_directory(const GlyphDataset& dataset, const std::string& path);

Image read_pgm(const std::string& path);
void write_pgm(const Image& image, const std::string& path);

}  // namespace hdmann
