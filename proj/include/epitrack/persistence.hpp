#pragma once

#include "epitrack/catalog.hpp"
#include "epitrack/store.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace epitrack {

inline constexpr std::string_view canonical_csv_header = "observed_at,country,province,city,confirmed,cured,deaths";

/// Canonical CSV of all repaired series: region order, then date order. The
/// observed_at column carries the report time that won daily coalescing.
std::string serialize_series_csv(const DatasetVersion& version);

/// One block of the version log.
struct VersionBlock {
    std::uint64_t version_id = 0;
    std::string as_of;
    std::string csv;
};

std::string encode_block(const VersionBlock& block);

/// Decodes all complete blocks. A truncated trailing block is dropped and
/// reported through `truncated`; any other damage throws ParseError.
std::vector<VersionBlock> decode_blocks(std::string_view bytes, bool* truncated = nullptr);

/// Rebuilds a version from a block; registry metadata comes from the catalog.
VersionPtr version_from_block(const VersionBlock& block, const Catalog& catalog);

/// Append-only file of published versions: each block is a little-endian
/// u64 payload length, then a u64 version id, the RFC 3339 publication time
/// ending in '\n', and the canonical CSV.
class VersionLog {
public:
    explicit VersionLog(std::filesystem::path path) : path_(std::move(path)) {}

    const std::filesystem::path& path() const noexcept { return path_; }

    /// Appends and flushes one block; throws FetchError on I/O failure.
    void append(const DatasetVersion& version) const;

    /// Replays all blocks in order and returns the latest version (an empty
    /// version 0 when the file is absent or empty).
    VersionPtr recover(const Catalog& catalog) const;

private:
    std::filesystem::path path_;
};

} // namespace epitrack
