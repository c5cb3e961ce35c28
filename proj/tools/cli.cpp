#include "cli.hpp"

#include "epitrack/api.hpp"
#include "epitrack/error.hpp"
#include "epitrack/ingest.hpp"
#include "epitrack/persistence.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <pthread.h>
#include <thread>
#include <unistd.h>

#ifndef EPITRACK_DEFAULT_TABLES_DIR
#define EPITRACK_DEFAULT_TABLES_DIR "data"
#endif

namespace epitrack::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* log_file_name = "versions.log";

/// Environment failure: exit 2 with a message.
struct EnvironmentFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

fs::path tables_dir(const std::string& explicit_dir, const std::string& data_dir) {
    if (!explicit_dir.empty()) return explicit_dir;
    if (!data_dir.empty() && fs::exists(fs::path(data_dir) / Catalog::alias_file)) return data_dir;
    return EPITRACK_DEFAULT_TABLES_DIR;
}

Catalog load_catalog(const fs::path& dir) {
    try {
        return Catalog::load(dir);
    } catch (const std::exception& e) {
        throw EnvironmentFailure("cannot load reference tables from " + dir.string() + ": " + e.what());
    }
}

void ensure_data_dir(const std::string& dir, bool writable) {
    if (dir.empty()) throw EnvironmentFailure("no data directory (use --data-dir or EPITRACK_DATA_DIR)");
    std::error_code ec;
    if (writable) fs::create_directories(dir, ec);
    if (!fs::is_directory(dir, ec)) throw EnvironmentFailure("data directory " + dir + " does not exist");
    if (::access(dir.c_str(), writable ? (R_OK | W_OK) : R_OK) != 0)
        throw EnvironmentFailure("data directory " + dir + " is not " + (writable ? "writable" : "readable"));
}

VersionPtr recover(const std::string& data_dir, const Catalog& catalog) {
    try {
        return VersionLog(fs::path(data_dir) / log_file_name).recover(catalog);
    } catch (const std::exception& e) {
        throw EnvironmentFailure(std::string("cannot recover version log: ") + e.what());
    }
}

json report_json(const IngestReport& r) {
    json sources = json::array();
    for (const auto& s : r.sources) {
        json j{{"location", s.location}, {"kind", std::string(to_string(s.kind))}, {"ok", s.ok},
               {"rows", s.rows_parsed}, {"skipped", s.rows_skipped}};
        if (!s.ok) j["error"] = s.error;
        sources.push_back(std::move(j));
    }
    return {{"report", "ingest"},
            {"published", r.published},
            {"version_id", r.version_id},
            {"rows", r.rows_parsed},
            {"skipped", r.rows_skipped},
            {"attributed", r.rows_attributed},
            {"quarantined", r.rows_quarantined},
            {"quarantined_names", r.quarantined_names},
            {"records", r.records},
            {"regions", r.regions},
            {"anomalies", r.anomalies},
            {"value_changes", r.value_changes},
            {"sources", std::move(sources)}};
}

// ----------------------------------------------------------------- ingest

struct IngestArgs {
    std::vector<std::string> sources;
    std::string data_dir;
    std::string tables;
};

int cmd_ingest(const IngestArgs& a, std::ostream& out, std::ostream& err) {
    if (a.sources.empty()) {
        err << "ingest: at least one --source kind=location is required\n";
        return exit_usage;
    }
    std::vector<SourceDescriptor> descs;
    try {
        for (const auto& s : a.sources) descs.push_back(SourceDescriptor::parse(s));
    } catch (const Error& e) {
        err << "ingest: " << e.what() << '\n';
        return exit_usage;
    }
    ensure_data_dir(a.data_dir, true);
    const Catalog catalog = load_catalog(tables_dir(a.tables, a.data_dir));
    Store store(recover(a.data_dir, catalog));
    const VersionLog log(fs::path(a.data_dir) / log_file_name);
    store.set_sink([&log](const DatasetVersion& v) { log.append(v); });

    IngestResult result;
    try {
        result = ingest_snapshot(descs, store, catalog);
    } catch (const FetchError& e) {
        throw EnvironmentFailure(e.what());
    }
    out << report_json(result.report).dump() << '\n';
    for (const auto& s : result.report.sources)
        if (!s.ok) err << "warning: source " << s.location << " failed: " << s.error << '\n';
    if (result.report.rows_quarantined)
        err << "warning: " << result.report.rows_quarantined << " rows quarantined under XX\n";
    if (!result.report.published) {
        err << "ingest: every source failed; nothing published\n";
        return exit_environment;
    }
    return exit_ok;
}

// ------------------------------------------------------------------ serve

struct ServeArgs {
    std::string listen = "127.0.0.1:8080";
    std::string data_dir;
    std::string assets;
    std::string tables;
    std::size_t threads = 8;
};

int cmd_serve(const ServeArgs& a, std::ostream& out, std::ostream& err) {
    const auto colon = a.listen.rfind(':');
    int port = -1;
    if (colon != std::string::npos) {
        try {
            std::size_t used = 0;
            port = std::stoi(a.listen.substr(colon + 1), &used);
            if (used != a.listen.size() - colon - 1) port = -1;
        } catch (const std::exception&) {
            port = -1;
        }
    }
    if (port < 0 || port > 65535 || colon == 0) {
        err << "serve: --listen must be host:port\n";
        return exit_usage;
    }
    ensure_data_dir(a.data_dir, false);
    const Catalog catalog = load_catalog(tables_dir(a.tables, a.data_dir));
    Store store(recover(a.data_dir, catalog));

    api::ServerOptions options;
    options.host = a.listen.substr(0, colon);
    options.port = port;
    options.threads = a.threads;
    if (!a.assets.empty()) options.asset_dir = a.assets;
    api::Server server(store, options);

    // Signals are taken synchronously by a watcher thread; worker threads inherit the blocked mask.
    sigset_t signals, previous;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    sigaddset(&signals, SIGUSR1);
    pthread_sigmask(SIG_BLOCK, &signals, &previous);

    if (!server.bind()) {
        pthread_sigmask(SIG_SETMASK, &previous, nullptr);
        err << "serve: cannot listen on " << a.listen << " (address in use or unavailable)\n";
        return exit_environment;
    }
    std::thread watcher([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        if (sig != SIGUSR1) err << "serve: received signal " << sig << ", shutting down\n";
        server.stop();
    });
    out << json{{"event", "listening"}, {"host", options.host}, {"port", server.port()},
                {"version_id", store.current()->version_id}}.dump()
        << std::endl;
    server.listen();
    pthread_kill(watcher.native_handle(), SIGUSR1);
    watcher.join();
    pthread_sigmask(SIG_SETMASK, &previous, nullptr);
    out << json{{"event", "stopped"}}.dump() << std::endl;
    return exit_ok;
}

// ----------------------------------------------------------------- export

const std::vector<std::string>& export_columns() {
    static const std::vector<std::string> columns{"confirmed",     "cured",       "deaths",         "daily_confirmed",
                                                  "daily_cured",   "daily_deaths", "active",        "mortality_rate",
                                                  "cure_rate",     "per_million"};
    return columns;
}

struct ExportArgs {
    std::string region;
    std::vector<std::string> metrics;
    std::string format = "csv";
    std::string data_dir;
    std::string tables;
};

int cmd_export(const ExportArgs& a, std::ostream& out, std::ostream& err) {
    if (a.format != "csv") {
        err << "export: unsupported format '" << a.format << "'\n";
        return exit_usage;
    }
    std::vector<std::string> columns = a.metrics.empty() ? export_columns() : a.metrics;
    for (const auto& c : columns) {
        if (std::find(export_columns().begin(), export_columns().end(), c) == export_columns().end()) {
            err << "export: unknown metric '" << c << "'\n";
            return exit_usage;
        }
    }
    RegionId region;
    try {
        region = RegionId::parse_path(a.region);
    } catch (const Error& e) {
        err << "export: " << e.what() << '\n';
        return exit_domain;
    }
    ensure_data_dir(a.data_dir, false);
    const Catalog catalog = load_catalog(tables_dir(a.tables, a.data_dir));
    const VersionPtr version = recover(a.data_dir, catalog);

    std::vector<DerivedPoint> points;
    if (const RegionMeta* meta = version->meta(region)) {
        points = derive_series(effective_series(*version, region), *meta);
    } else if (!(region.is_country() && catalog.knows_country(region.country)) && !catalog.aliases().names_of(region)) {
        err << "export: unknown region " << region.path() << '\n';
        return exit_domain;
    }

    out << "date";
    for (const auto& c : columns) out << ',' << c;
    out << '\n';
    for (const auto& p : points) {
        // Values are written exactly as the API's JSON renders them.
        const json row = api::point_json(p);
        out << p.date.to_string();
        for (const auto& c : columns) {
            out << ',';
            if (!row[c].is_null()) out << row[c].dump();
        }
        out << '\n';
    }
    return exit_ok;
}

// --------------------------------------------------------------- validate

struct ValidateArgs {
    std::string source;
    std::string data_dir;
    std::string tables;
};

int cmd_validate(const ValidateArgs& a, std::ostream& out, std::ostream& err) {
    SourceDescriptor desc;
    try {
        desc = SourceDescriptor::parse(a.source);
    } catch (const Error& e) {
        err << "validate: " << e.what() << '\n';
        return exit_usage;
    }
    const Catalog catalog = load_catalog(tables_dir(a.tables, a.data_dir));
    std::string bytes;
    try {
        bytes = fetch_source(desc);
    } catch (const FetchError& e) {
        throw EnvironmentFailure(e.what());
    }

    std::vector<RawRow> rows;
    std::vector<ParseIssue> errors;
    std::size_t skipped = 0;
    if (desc.kind == SourceKind::canonical_csv) {
        CsvParseResult parsed = parse_canonical_csv_lenient(bytes);
        rows = std::move(parsed.rows);
        errors = std::move(parsed.errors);
    } else {
        try {
            DxyParseResult parsed = parse_dxy_json(bytes);
            rows = std::move(parsed.rows);
            skipped = parsed.skipped;
        } catch (const ParseError& e) {
            errors.push_back({e.line(), e.what()});
        }
    }
    std::map<std::string, std::size_t> quarantined;
    std::size_t quarantine_count = 0;
    for (const auto& row : rows) {
        if (normalize_region(row, catalog.aliases()).is_quarantine()) {
            ++quarantined[row.raw_country];
            ++quarantine_count;
        }
    }
    json error_list = json::array();
    for (const auto& e : errors) {
        error_list.push_back({{"line", e.line}, {"message", e.message}});
        err << desc.location << ':' << e.line << ": " << e.message << '\n';
    }
    out << json{{"report", "validate"},
                {"source", desc.location},
                {"kind", std::string(to_string(desc.kind))},
                {"rows", rows.size()},
                {"skipped", skipped},
                {"errors", std::move(error_list)},
                {"quarantined", quarantine_count},
                {"quarantined_names", quarantined}}
               .dump()
        << '\n';
    return errors.empty() ? exit_ok : exit_domain;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"epitrack: epidemic case tracking service"};
    app.require_subcommand(1);
    const char* env_dir = std::getenv("EPITRACK_DATA_DIR");
    const std::string default_dir = env_dir ? env_dir : "";

    IngestArgs ingest{{}, default_dir, {}};
    auto* ingest_cmd = app.add_subcommand("ingest", "Ingest snapshot sources and publish a new version");
    ingest_cmd->add_option("--source", ingest.sources, "kind=location (canonical_csv or dxy_json); repeatable");
    ingest_cmd->add_option("--data-dir", ingest.data_dir, "Data directory (default $EPITRACK_DATA_DIR)");
    ingest_cmd->add_option("--tables-dir", ingest.tables, "Directory with aliases/continents/population tables");

    ServeArgs serve;
    serve.data_dir = default_dir;
    auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP JSON API");
    serve_cmd->add_option("--listen", serve.listen, "host:port")->capture_default_str();
    serve_cmd->add_option("--data-dir", serve.data_dir, "Data directory (default $EPITRACK_DATA_DIR)");
    serve_cmd->add_option("--assets", serve.assets, "Static dashboard directory served at /");
    serve_cmd->add_option("--tables-dir", serve.tables, "Directory with reference tables");
    serve_cmd->add_option("--threads", serve.threads, "Worker threads")->capture_default_str();

    ExportArgs exp;
    exp.data_dir = default_dir;
    auto* export_cmd = app.add_subcommand("export", "Write a region's derived series as CSV");
    export_cmd->add_option("--region", exp.region, "Region path, e.g. CN or CN/Hubei")->required();
    export_cmd->add_option("--metric", exp.metrics, "Column(s) to export; default all");
    export_cmd->add_option("--format", exp.format, "Output format")->capture_default_str();
    export_cmd->add_option("--data-dir", exp.data_dir, "Data directory (default $EPITRACK_DATA_DIR)");
    export_cmd->add_option("--tables-dir", exp.tables, "Directory with reference tables");

    ValidateArgs val;
    val.data_dir = default_dir;
    auto* validate_cmd = app.add_subcommand("validate", "Parse and normalize a source without publishing");
    validate_cmd->add_option("--source", val.source, "kind=location")->required();
    validate_cmd->add_option("--data-dir", val.data_dir, "Data directory holding reference tables");
    validate_cmd->add_option("--tables-dir", val.tables, "Directory with reference tables");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n' << app.help();
        return exit_usage;
    }

    try {
        if (*ingest_cmd) return cmd_ingest(ingest, out, err);
        if (*serve_cmd) return cmd_serve(serve, out, err);
        if (*export_cmd) return cmd_export(exp, out, err);
        if (*validate_cmd) return cmd_validate(val, out, err);
    } catch (const EnvironmentFailure& e) {
        err << "error: " << e.what() << '\n';
        return exit_environment;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_domain;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_environment;
    }
    return exit_usage;
}

} // namespace epitrack::cli
