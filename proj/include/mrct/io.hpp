// mrctreg - MR-CT slice stack alignment and registration toolkit
// SPDX-License-Identifier: Apache-2.0

#ifndef MRCT_IO_HPP
#define MRCT_IO_HPP

#include <filesystem>
#include <string>

#include "mrct/align.hpp"
#include "mrct/image.hpp"
#include "mrct/registration.hpp"

namespace mrct {

/// Grayscale PGM (P5 binary or P2 ascii), 8- or 16-bit; intensities are
/// normalized by the header maxval.
Slice load_pgm(const std::filesystem::path& path);
void save_pgm(const Slice& slice, const std::filesystem::path& path, int bits = 16);

/// Label images are PGMs binarized at half the dynamic range.
LabelMask load_label_pgm(const std::filesystem::path& path);
void save_label_pgm(const LabelMask& mask, const std::filesystem::path& path);

/// Stack manifest: JSON object with modality, layer_gap_mm, slices and
/// labels arrays (label entries may be null). Paths are relative to the
/// manifest directory.
ImageStack load_stack(const std::filesystem::path& manifest_path);

/// Writes slices/ and labels/ PGMs next to a manifest named
/// `manifest_name` under `dir`.
void save_stack(const ImageStack& stack, const std::filesystem::path& dir,
                const std::string& manifest_name = "stack.json");

/// Displacement field file: magic "MRCTFLD1", little-endian u32 width and
/// height, then row-major (du_x, du_y) pairs of little-endian f32.
void save_field(const DisplacementField& field, const std::filesystem::path& path);
DisplacementField load_field(const std::filesystem::path& path);

/// Correspondence CSV: `# key=value` header lines carrying the anchor and
/// gaps, then one `mr_index,ct_index_frac,score` record per pair.
void save_correspondence_csv(const CorrespondenceSet& set, const std::filesystem::path& path);
CorrespondenceSet load_correspondence_csv(const std::filesystem::path& path);

/// Deterministic float formatting shared by all CSV writers.
std::string format_double(double v);

}  // namespace mrct

#endif
