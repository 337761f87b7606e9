#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace clob {

/// Milliseconds since midnight, timezone-naive.
using Millis = std::int64_t;

Millis parse_clock(const std::string& text);
std::string format_clock(Millis t);

enum class RecordKind { Trade, Quote };

/// One trade or quote row. Trades use price/volume, quotes use the
/// bid/ask block; unused fields stay zero.
struct TaqRecord {
    Millis timestamp = 0;
    RecordKind kind = RecordKind::Trade;
    std::string trade_type;
    double price = 0.0;
    double volume = 0.0;
    double bid = 0.0;
    double ask = 0.0;
    double bid_vol = 0.0;
    double ask_vol = 0.0;

    bool operator==(const TaqRecord&) const = default;
};

struct Reject {
    std::size_t line = 0;
    std::string reason;
    std::string text;
};

struct TaqTable {
    std::vector<TaqRecord> records;
    std::vector<Reject> rejects;
};

/// Reads the CSV schema
///   timestamp,kind,trade_type,price,volume,bid,ask,bid_vol,ask_vol
/// with timestamp HH:MM:SS[.mmm] and kind T|Q. Bad rows go to rejects.
TaqTable read_taq_csv(std::istream& in);
TaqTable read_taq_csv(const std::string& path);
void write_taq_csv(std::ostream& out, const std::vector<TaqRecord>& records);
void write_rejects_csv(std::ostream& out, const std::vector<Reject>& rejects);

struct CleanOptions {
    Millis session_start = 9 * 3600'000;
    Millis session_end = 16 * 3600'000 + 50 * 60'000;
    Millis opening_drop = 60'000;
    std::vector<std::string> kept_trade_types{"AT"};
    /// Half-open [start, end) windows removed from the session.
    std::vector<std::pair<Millis, Millis>> auction_windows;
};

struct CleanReport {
    std::size_t input = 0;
    std::size_t kept = 0;
    std::size_t outside_session = 0;
    std::size_t opening_minute = 0;
    std::size_t auction = 0;
    std::map<std::string, std::size_t> dropped_trade_types;
};

/// Keeps records in [session_start + opening_drop, session_end] outside the
/// auction windows, and only trades of the kept types. Output is stably
/// sorted by timestamp.
std::vector<TaqRecord> clean(std::vector<TaqRecord> records, const CleanOptions& options = {},
                             CleanReport* report = nullptr);

/// One quote per timestamp (the last seen) and one trade per
/// (timestamp, trade type) carrying summed volume at the VWAP. Within a
/// timestamp the quote comes first, then trades in order of first appearance.
std::vector<TaqRecord> compact(const std::vector<TaqRecord>& records);

/// (ask_vol * bid + bid_vol * ask) / (bid_vol + ask_vol).
double micro_price(const TaqRecord& quote);

/// Micro-price at every quote, in record order, with its timestamp.
std::vector<std::pair<Millis, double>> micro_price_series(const std::vector<TaqRecord>& records);

/// Trade prices in record order.
std::vector<double> trade_prices(const std::vector<TaqRecord>& records);

}  // namespace clob
