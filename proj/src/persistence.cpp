#include "epitrack/persistence.hpp"

#include "epitrack/csv.hpp"
#include "epitrack/error.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>

#include <fcntl.h>
#include <unistd.h>

namespace epitrack {

namespace {

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(std::string_view in) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(in[i]);
    return v;
}

Count parse_count(std::string_view s, std::size_t line) {
    Count v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || v < 0)
        throw ParseError(line, "bad count '" + std::string(s) + "'");
    return v;
}

} // namespace

std::string serialize_series_csv(const DatasetVersion& version) {
    std::string out(canonical_csv_header);
    out += '\n';
    for (const auto& [id, s] : version.series) {
        for (std::size_t i = 0; i < s.repaired.size(); ++i) {
            const DailyRecord& r = s.repaired[i];
            out += format_timestamp(i < s.observed.size() ? s.observed[i] : start_of(r.date));
            out += ',' + id.country + ',' + id.province.value_or("") + ',' + id.city.value_or("");
            out += ',' + std::to_string(r.confirmed) + ',' + std::to_string(r.cured) + ',' + std::to_string(r.deaths);
            out += '\n';
        }
    }
    return out;
}

std::string encode_block(const VersionBlock& block) {
    std::string payload;
    put_u64(payload, block.version_id);
    payload += block.as_of;
    payload += '\n';
    payload += block.csv;
    std::string out;
    put_u64(out, payload.size());
    out += payload;
    return out;
}

std::vector<VersionBlock> decode_blocks(std::string_view bytes, bool* truncated) {
    std::vector<VersionBlock> out;
    if (truncated) *truncated = false;
    std::size_t pos = 0;
    while (pos < bytes.size()) {
        if (bytes.size() - pos < 8 || bytes.size() - pos - 8 < get_u64(bytes.substr(pos, 8))) {
            if (truncated) *truncated = true;
            break;
        }
        const std::uint64_t len = get_u64(bytes.substr(pos, 8));
        const std::string_view payload = bytes.substr(pos + 8, len);
        pos += 8 + len;
        const auto nl = payload.find('\n', 8);
        if (payload.size() < 8 || nl == std::string_view::npos)
            throw ParseError(0, "corrupt version block #" + std::to_string(out.size() + 1));
        VersionBlock block;
        block.version_id = get_u64(payload.substr(0, 8));
        block.as_of = std::string(payload.substr(8, nl - 8));
        block.csv = std::string(payload.substr(nl + 1));
        if (!out.empty() && block.version_id <= out.back().version_id)
            throw ParseError(0, "version ids in log are not increasing");
        out.push_back(std::move(block));
    }
    return out;
}

VersionPtr version_from_block(const VersionBlock& block, const Catalog& catalog) {
    std::map<RegionId, std::pair<std::vector<DailyRecord>, std::vector<Timestamp>>> rows;
    for (const auto& row : csv::read_table(block.csv, canonical_csv_header, 7)) {
        if (row.fields.size() != 7) throw ParseError(row.line, "expected 7 fields");
        try {
            const auto opt = [](const std::string& s) { return s.empty() ? std::nullopt : std::optional(s); };
            RegionId id = RegionId::make(row[1], opt(row[2]), opt(row[3]));
            const Timestamp ts = parse_timestamp(row[0]);
            auto& [records, observed] = rows[id];
            records.push_back({utc_day(ts), parse_count(row[4], row.line), parse_count(row[5], row.line),
                               parse_count(row[6], row.line)});
            observed.push_back(ts);
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(row.line, e.what());
        }
    }
    VersionBuilder builder;
    for (auto& [id, data] : rows) builder.put_series(make_series(id, std::move(data.first), std::move(data.second)));
    builder.close_hierarchy(catalog);
    validate(builder.series(), builder.registry());
    auto version = std::make_shared<DatasetVersion>();
    version->version_id = block.version_id;
    version->as_of = parse_timestamp(block.as_of);
    version->series = builder.series();
    version->registry = builder.registry();
    return version;
}

void VersionLog::append(const DatasetVersion& version) const {
    const std::string bytes = encode_block({version.version_id, format_timestamp(version.as_of),
                                            serialize_series_csv(version)});
    const int fd = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd < 0) throw FetchError(false, "cannot open version log " + path_.string());
    std::size_t written = 0;
    while (written < bytes.size()) {
        const ssize_t n = ::write(fd, bytes.data() + written, bytes.size() - written);
        if (n <= 0) {
            ::close(fd);
            throw FetchError(false, "write to version log " + path_.string() + " failed");
        }
        written += static_cast<std::size_t>(n);
    }
    ::fsync(fd);
    ::close(fd);
}

VersionPtr VersionLog::recover(const Catalog& catalog) const {
    if (!std::filesystem::exists(path_)) return std::make_shared<const DatasetVersion>();
    bool truncated = false;
    const auto blocks = decode_blocks(read_file(path_), &truncated);
    if (truncated) std::fprintf(stderr, "warning: ignoring truncated trailing block in %s\n", path_.c_str());
    VersionPtr latest = std::make_shared<const DatasetVersion>();
    for (const auto& block : blocks) latest = version_from_block(block, catalog);
    return latest;
}

} // namespace epitrack
