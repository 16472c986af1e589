#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "kto/snapshot.hpp"

namespace kto {

/// CSV: UTF-8, one snapshot per row, comma-separated decimal floats,
/// no header by default. Loaded shape is always rank 1 ([columns]).
SnapshotSet load_csv(const std::filesystem::path& path, bool header = false,
                     std::optional<double> dt = std::nullopt);
void save_csv(const SnapshotSet& set, const std::filesystem::path& path, bool header = false);

/// Binary tensor format "KTO1": magic "KTO1", u32 LE rank, rank x u64 LE
/// dims, u64 LE count, then count * prod(dims) float64 LE values.
/// Round-trips bit-exactly.
SnapshotSet load_kto1(const std::filesystem::path& path,
                      std::optional<double> dt = std::nullopt);
void save_kto1(const SnapshotSet& set, const std::filesystem::path& path);

/// Image sequences: one binary PGM (P5) or PPM (P6) file per frame in a
/// directory, frames ordered by lexicographic filename. Shapes are
/// [height, width] for PGM and [height, width, 3] for PPM; pixel values
/// become doubles in [0, 255].
SnapshotSet load_image_dir(const std::filesystem::path& dir,
                           std::optional<double> dt = std::nullopt);

/// Writes set as <prefix>NNNN.pgm / .ppm into dir (created if missing).
/// Requires a [h, w] or [h, w, 3] shape and all values in [0, 255];
/// values are rounded to the nearest integer.
void save_image_dir(const SnapshotSet& set, const std::filesystem::path& dir,
                    const std::string& prefix = "frame_");

/// Loads a single PGM/PPM frame as a count-1 SnapshotSet.
SnapshotSet load_image(const std::filesystem::path& path);
void save_image(const SnapshotSet& set, std::size_t index, const std::filesystem::path& path);

/// Picks a loader from the path: directory -> image sequence, .csv -> CSV,
/// anything else -> KTO1.
SnapshotSet load_snapshots_auto(const std::filesystem::path& path,
                                std::optional<double> dt = std::nullopt);

/// Writes `content` to `path` via a temporary file and an atomic rename, so
/// readers never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// FNV-1a 64-bit hash of a file's bytes, as 16 lowercase hex digits.
std::string file_hash_hex(const std::filesystem::path& path);

}  // namespace kto
