#pragma once

// SuiteSparse collection client: name resolution, HTTP(S) download,
// tar.gz extraction and a per-user on-disk cache.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "sparsebench/matrix.hpp"

namespace sparsebench {

struct MatrixSource {
  std::string name;  // "Group/name"
  std::string url;
  std::filesystem::path local_path;
  std::optional<std::uint64_t> expected_archive_bytes;
};

/// A matrix from the reference corpus, with its published statistics
/// (truncated display values as printed).
struct CollectionEntry {
  std::string_view group;
  std::string_view name;
  index_t rows;
  std::uint64_t nonzeros;
  std::string_view density;
  std::string_view avg_nnz_per_row;
  index_t max_nnz_per_row;
  index_t max_nnz_per_col;
};

std::span<const CollectionEntry> reference_collection();
const CollectionEntry* find_reference(std::string_view name);

/// $SPARSEBENCH_CACHE, else $XDG_CACHE_HOME/sparsebench, else ~/.cache/sparsebench.
std::filesystem::path default_cache_dir();

/// Accepts "Group/name" or a bare name from the reference corpus.
/// Throws FetchError for bare names it does not know.
MatrixSource resolve_source(std::string_view name, const std::filesystem::path& cache_dir);
inline MatrixSource resolve_source(std::string_view name) {
  return resolve_source(name, default_cache_dir());
}

class Transport {
public:
  virtual ~Transport() = default;
  /// Returns the response body; throws FetchError on any failure.
  virtual std::string get(const std::string& url) = 0;
};

/// libcurl-backed transport (follows redirects, fails on HTTP errors).
std::unique_ptr<Transport> make_http_transport();

/// Returns local_path, downloading and unpacking the archive first unless it
/// is already cached. Concurrent callers for the same source serialize on a
/// lock file next to the cache entry.
std::filesystem::path fetch_matrix(const MatrixSource& source, Transport& transport);
std::filesystem::path fetch_matrix(const MatrixSource& source);

std::string gunzip(std::string_view compressed);

/// Extracts a member from a ustar/GNU tar image. Prefers a member whose path
/// ends in `preferred_suffix`, else the first ".mtx" member.
std::string extract_tar_member(std::string_view tar, std::string_view preferred_suffix);

}  // namespace sparsebench
