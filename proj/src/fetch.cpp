#include "sparsebench/fetch.hpp"

#include <curl/curl.h>
#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>
#include <zlib.h>

#include <array>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <optional>
#include <system_error>

namespace sparsebench {

namespace {

constexpr std::array<CollectionEntry, 22> kReference{{
    {"MaxPlanck", "shallow_water1", 81920, 204800, "3.05e-05", "2.50", 4, 4},
    {"Um", "2cubes_sphere", 101492, 874378, "8.48e-05", "8.61", 24, 29},
    {"Hamm", "scircuit", 170998, 958936, "3.27e-05", "5.60", 353, 353},
    {"Williams", "mac_econ_fwd500", 206500, 1273389, "2.98e-05", "6.16", 44, 47},
    {"Williams", "cop20k_A", 121192, 1362087, "9.27e-05", "11.23", 24, 75},
    {"Williams", "cant", 62451, 2034917, "5.21e-04", "32.58", 40, 40},
    {"Williams", "pdb1HYS", 36417, 2190591, "1.65e-03", "60.15", 184, 162},
    {"Williams", "webbase-1M", 1000005, 3105536, "3.10e-06", "3.10", 4700, 28685},
    {"GHS_psdef", "hood", 220542, 5057982, "1.03e-04", "22.93", 51, 77},
    {"GHS_indef", "bmw3_2", 227362, 5757996, "1.11e-04", "25.32", 204, 327},
    {"ATandT", "pre2", 659033, 5834044, "1.34e-05", "8.85", 627, 745},
    {"Boeing", "pwtk", 217918, 5871175, "1.23e-04", "26.94", 180, 90},
    {"GHS_psdef", "crankseg_2", 63838, 7106348, "1.74e-03", "111.31", 297, 3423},
    {"Norris", "torso1", 116158, 8516500, "6.31e-04", "73.31", 3263, 1224},
    {"Bourchtein", "atmosmodd", 1270432, 8814880, "5.46e-06", "6.93", 7, 7},
    {"INPRO", "msdoor", 415863, 9794513, "5.66e-05", "23.55", 57, 77},
    {"Koutsovasilis", "F1", 343791, 13590452, "1.14e-04", "39.53", 306, 378},
    {"ND", "nd24k", 72000, 14393817, "2.77e-03", "199.91", 481, 483},
    {"GHS_psdef", "inline_1", 503712, 18659941, "7.35e-05", "37.04", 843, 333},
    {"", "mesh_2048", 4194304, 20963328, "1.19e-06", "4.99", 5, 5},
    {"GHS_psdef", "ldoor", 952203, 21723010, "2.39e-05", "22.81", 49, 77},
    {"vanHeukelum", "cage14", 1505785, 27130349, "1.19e-05", "18.01", 41, 41},
}};

constexpr std::string_view kBaseUrl = "https://sparse.tamu.edu/MM/";

bool valid_component(std::string_view s) {
  if (s.empty() || s == "." || s == "..") return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.'))
      return false;
  return true;
}

std::uint64_t parse_octal(std::string_view field) {
  std::uint64_t v = 0;
  for (char c : field) {
    if (c == '\0' || c == ' ') {
      if (v != 0) break;
      continue;
    }
    if (c < '0' || c > '7') throw FetchError("corrupt tar header size field");
    v = v * 8 + static_cast<std::uint64_t>(c - '0');
  }
  return v;
}

std::string_view cstr_field(std::string_view block, std::size_t off, std::size_t len) {
  auto f = block.substr(off, len);
  auto nul = f.find('\0');
  return nul == std::string_view::npos ? f : f.substr(0, nul);
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

class FileLock {
public:
  explicit FileLock(const std::filesystem::path& path) {
    fd_ = ::open(path.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
    if (fd_ < 0) throw FetchError("cannot create lock file " + path.string());
    if (::flock(fd_, LOCK_EX) != 0) {
      ::close(fd_);
      throw FetchError("cannot lock " + path.string());
    }
  }
  ~FileLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

private:
  int fd_ = -1;
};

std::size_t curl_write(char* data, std::size_t size, std::size_t count, void* user) {
  static_cast<std::string*>(user)->append(data, size * count);
  return size * count;
}

class CurlTransport final : public Transport {
public:
  CurlTransport() {
    static std::once_flag once;
    std::call_once(once, [] { curl_global_init(CURL_GLOBAL_DEFAULT); });
  }

  std::string get(const std::string& url) override {
    std::unique_ptr<CURL, decltype(&curl_easy_cleanup)> h(curl_easy_init(), &curl_easy_cleanup);
    if (!h) throw FetchError("curl_easy_init failed");
    std::string body;
    curl_easy_setopt(h.get(), CURLOPT_URL, url.c_str());
    curl_easy_setopt(h.get(), CURLOPT_FOLLOWLOCATION, 1L);
    curl_easy_setopt(h.get(), CURLOPT_FAILONERROR, 1L);
    curl_easy_setopt(h.get(), CURLOPT_CONNECTTIMEOUT, 30L);
    curl_easy_setopt(h.get(), CURLOPT_WRITEFUNCTION, &curl_write);
    curl_easy_setopt(h.get(), CURLOPT_WRITEDATA, &body);
    const CURLcode rc = curl_easy_perform(h.get());
    if (rc != CURLE_OK) throw FetchError("download of " + url + " failed: " + curl_easy_strerror(rc));
    return body;
  }
};

}  // namespace

std::span<const CollectionEntry> reference_collection() { return kReference; }

const CollectionEntry* find_reference(std::string_view name) {
  if (name == "mac_econ") name = "mac_econ_fwd500";
  for (const auto& e : kReference)
    if (e.name == name) return &e;
  return nullptr;
}

std::filesystem::path default_cache_dir() {
  if (const char* v = std::getenv("SPARSEBENCH_CACHE"); v && *v) return v;
  if (const char* v = std::getenv("XDG_CACHE_HOME"); v && *v)
    return std::filesystem::path(v) / "sparsebench";
  if (const char* v = std::getenv("HOME"); v && *v)
    return std::filesystem::path(v) / ".cache" / "sparsebench";
  return std::filesystem::temp_directory_path() / "sparsebench";
}

MatrixSource resolve_source(std::string_view name, const std::filesystem::path& cache_dir) {
  if (name.empty()) throw FetchError("empty matrix name");
  std::string group;
  std::string base;
  if (auto slash = name.find('/'); slash != std::string_view::npos) {
    group = name.substr(0, slash);
    base = name.substr(slash + 1);
  } else {
    const CollectionEntry* ref = find_reference(name);
    if (ref == nullptr || ref->group.empty())
      throw FetchError("cannot resolve '" + std::string(name) +
                       "': not in the reference corpus; use Group/name");
    group = ref->group;
    base = ref->name;
  }
  if (!valid_component(group) || !valid_component(base))
    throw FetchError("invalid collection name '" + std::string(name) + "'");

  MatrixSource src;
  src.name = group + "/" + base;
  src.url = std::string(kBaseUrl) + group + "/" + base + ".tar.gz";
  src.local_path = cache_dir / group / (base + ".mtx");
  return src;
}

std::unique_ptr<Transport> make_http_transport() { return std::make_unique<CurlTransport>(); }

std::string gunzip(std::string_view compressed) {
  z_stream zs{};
  if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK) throw FetchError("inflateInit2 failed");
  std::unique_ptr<z_stream, decltype(&inflateEnd)> guard(&zs, &inflateEnd);
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(compressed.data()));
  zs.avail_in = static_cast<uInt>(compressed.size());
  std::string out;
  std::array<char, 1 << 16> chunk{};
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    zs.next_out = reinterpret_cast<Bytef*>(chunk.data());
    zs.avail_out = static_cast<uInt>(chunk.size());
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) throw FetchError("gzip stream is corrupt");
    out.append(chunk.data(), chunk.size() - zs.avail_out);
    if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) throw FetchError("gzip stream truncated");
  }
  return out;
}

std::string extract_tar_member(std::string_view tar, std::string_view preferred_suffix) {
  constexpr std::size_t block = 512;
  std::size_t off = 0;
  std::string long_name;
  std::optional<std::string> fallback;
  while (off + block <= tar.size()) {
    const std::string_view hdr = tar.substr(off, block);
    if (hdr.find_first_not_of('\0') == std::string_view::npos) break;
    const std::uint64_t size = parse_octal(hdr.substr(124, 12));
    const char type = hdr[156];
    const std::size_t data_off = off + block;
    if (data_off + size > tar.size()) throw FetchError("tar archive truncated");
    const std::string_view data = tar.substr(data_off, size);
    off = data_off + (size + block - 1) / block * block;

    if (type == 'L') {
      long_name = std::string(cstr_field(data, 0, data.size()));
      continue;
    }
    if (type == 'x' || type == 'g') continue;

    std::string path;
    if (!long_name.empty()) {
      path = std::move(long_name);
      long_name.clear();
    } else {
      path = std::string(cstr_field(hdr, 0, 100));
      if (hdr.substr(257, 5) == "ustar") {
        auto prefix = cstr_field(hdr, 345, 155);
        if (!prefix.empty()) path = std::string(prefix) + "/" + path;
      }
    }
    if (type != '0' && type != '\0') continue;
    if (ends_with(path, preferred_suffix)) return std::string(data);
    if (!fallback && ends_with(path, ".mtx")) fallback = std::string(data);
  }
  if (fallback) return *fallback;
  throw FetchError("archive holds no .mtx member");
}

std::filesystem::path fetch_matrix(const MatrixSource& source, Transport& transport) {
  namespace fs = std::filesystem;
  if (source.name.empty()) throw FetchError("matrix source has no name");
  if (fs::exists(source.local_path)) return source.local_path;

  std::error_code ec;
  fs::create_directories(source.local_path.parent_path(), ec);
  if (ec) throw FetchError("cannot create cache directory " + source.local_path.parent_path().string());

  FileLock lock(fs::path(source.local_path.string() + ".lock"));
  if (fs::exists(source.local_path)) return source.local_path;  // another process finished it

  const std::string archive = transport.get(source.url);
  if (source.expected_archive_bytes && archive.size() != *source.expected_archive_bytes)
    throw FetchError("size mismatch for " + source.name + ": got " + std::to_string(archive.size()) +
                     " bytes, expected " + std::to_string(*source.expected_archive_bytes));

  const std::string base = source.local_path.filename().string();
  const std::string mtx = extract_tar_member(gunzip(archive), "/" + base);

  const fs::path tmp = source.local_path.string() + ".part";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(mtx.data(), static_cast<std::streamsize>(mtx.size()));
    if (!out) throw FetchError("cannot write " + tmp.string());
  }
  fs::rename(tmp, source.local_path, ec);
  if (ec) throw FetchError("cannot move " + tmp.string() + " into the cache");
  return source.local_path;
}

std::filesystem::path fetch_matrix(const MatrixSource& source) {
  if (std::filesystem::exists(source.local_path)) return source.local_path;
  auto transport = make_http_transport();
  return fetch_matrix(source, *transport);
}

}  // namespace sparsebench
