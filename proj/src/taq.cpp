#include "clob/taq.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "clob/errors.hpp"

namespace clob {

namespace {

const std::vector<std::string> kColumns{"timestamp", "kind",   "trade_type", "price",  "volume",
                                        "bid",       "ask",    "bid_vol",    "ask_vol"};

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string trim(std::string s) {
    const auto ws = " \t\r";
    s.erase(0, s.find_first_not_of(ws));
    const auto end = s.find_last_not_of(ws);
    s.erase(end == std::string::npos ? 0 : end + 1);
    return s;
}

double parse_number(const std::string& s, const char* name) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v))
        throw std::invalid_argument(std::string("bad ") + name + " '" + s + "'");
    return v;
}

std::string shortest(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

TaqRecord parse_row(const std::vector<std::string>& f) {
    TaqRecord r;
    r.timestamp = parse_clock(f[0]);
    const std::string& kind = f[1];
    if (kind == "T" || kind == "trade") {
        r.kind = RecordKind::Trade;
        r.trade_type = f[2];
        if (r.trade_type.empty()) throw std::invalid_argument("trade without trade_type");
        r.price = parse_number(f[3], "price");
        r.volume = parse_number(f[4], "volume");
        if (!(r.price > 0.0)) throw std::invalid_argument("trade price must be positive");
        if (!(r.volume > 0.0)) throw std::invalid_argument("trade volume must be positive");
    } else if (kind == "Q" || kind == "quote") {
        r.kind = RecordKind::Quote;
        r.bid = parse_number(f[5], "bid");
        r.ask = parse_number(f[6], "ask");
        r.bid_vol = parse_number(f[7], "bid_vol");
        r.ask_vol = parse_number(f[8], "ask_vol");
        if (r.bid > r.ask) throw std::invalid_argument("quote has bid above ask");
        if (r.bid_vol < 0.0 || r.ask_vol < 0.0) throw std::invalid_argument("negative quote volume");
    } else {
        throw std::invalid_argument("unknown kind '" + kind + "'");
    }
    return r;
}

bool in_window(Millis t, const std::pair<Millis, Millis>& w) { return t >= w.first && t < w.second; }

}  // namespace

Millis parse_clock(const std::string& text) {
    int h = 0, m = 0, s = 0, ms = 0;
    char c1 = 0, c2 = 0;
    std::istringstream ss(text);
    ss >> h >> c1 >> m >> c2 >> s;
    if (!ss || c1 != ':' || c2 != ':') throw std::invalid_argument("bad timestamp '" + text + "'");
    if (ss.peek() == '.') {
        ss.get();
        std::string frac;
        ss >> frac;
        if (frac.empty() || frac.size() > 3 ||
            !std::all_of(frac.begin(), frac.end(), [](char c) { return c >= '0' && c <= '9'; }))
            throw std::invalid_argument("bad timestamp '" + text + "'");
        frac.resize(3, '0');
        ms = std::stoi(frac);
    }
    if (!ss.eof() && ss.peek() != EOF) throw std::invalid_argument("bad timestamp '" + text + "'");
    if (h < 0 || h > 23 || m < 0 || m > 59 || s < 0 || s > 59)
        throw std::invalid_argument("timestamp out of range '" + text + "'");
    return ((static_cast<Millis>(h) * 60 + m) * 60 + s) * 1000 + ms;
}

std::string format_clock(Millis t) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02d:%02d:%02d.%03d", static_cast<int>(t / 3600'000),
                  static_cast<int>(t / 60'000 % 60), static_cast<int>(t / 1000 % 60),
                  static_cast<int>(t % 1000));
    return buf;
}

TaqTable read_taq_csv(std::istream& in) {
    TaqTable table;
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::size_t> index;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto fields = split(t);
        for (auto& f : fields) f = trim(f);
        if (index.empty()) {
            for (const auto& col : kColumns) {
                auto it = std::find(fields.begin(), fields.end(), col);
                if (it == fields.end()) throw ConfigError("TAQ header lacks column '" + col + "'");
                index.push_back(static_cast<std::size_t>(it - fields.begin()));
            }
            continue;
        }
        try {
            std::vector<std::string> ordered(kColumns.size());
            for (std::size_t c = 0; c < kColumns.size(); ++c) {
                if (index[c] < fields.size()) ordered[c] = fields[index[c]];
            }
            table.records.push_back(parse_row(ordered));
        } catch (const std::exception& e) {
            table.rejects.push_back({lineno, e.what(), line});
        }
    }
    if (index.empty()) throw ConfigError("TAQ input has no header");
    return table;
}

TaqTable read_taq_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    return read_taq_csv(in);
}

void write_taq_csv(std::ostream& out, const std::vector<TaqRecord>& records) {
    out << "timestamp,kind,trade_type,price,volume,bid,ask,bid_vol,ask_vol\n";
    for (const auto& r : records) {
        out << format_clock(r.timestamp) << ',';
        if (r.kind == RecordKind::Trade)
            out << "T," << r.trade_type << ',' << shortest(r.price) << ',' << shortest(r.volume)
                << ",,,,\n";
        else
            out << "Q,,,," << shortest(r.bid) << ',' << shortest(r.ask) << ','
                << shortest(r.bid_vol) << ',' << shortest(r.ask_vol) << '\n';
    }
}

void write_rejects_csv(std::ostream& out, const std::vector<Reject>& rejects) {
    out << "line,reason,text\n";
    for (const auto& r : rejects) {
        std::string text = r.text;
        std::replace(text.begin(), text.end(), '"', '\'');
        out << r.line << ",\"" << r.reason << "\",\"" << text << "\"\n";
    }
}

std::vector<TaqRecord> clean(std::vector<TaqRecord> records, const CleanOptions& options,
                             CleanReport* report) {
    CleanReport rep;
    rep.input = records.size();
    std::stable_sort(records.begin(), records.end(),
                     [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
    std::vector<TaqRecord> out;
    out.reserve(records.size());
    const Millis open = options.session_start + options.opening_drop;
    for (auto& r : records) {
        if (r.timestamp < options.session_start || r.timestamp > options.session_end) {
            ++rep.outside_session;
            continue;
        }
        if (r.timestamp < open) {
            ++rep.opening_minute;
            continue;
        }
        if (std::any_of(options.auction_windows.begin(), options.auction_windows.end(),
                        [&](const auto& w) { return in_window(r.timestamp, w); })) {
            ++rep.auction;
            continue;
        }
        if (r.kind == RecordKind::Trade &&
            std::find(options.kept_trade_types.begin(), options.kept_trade_types.end(),
                      r.trade_type) == options.kept_trade_types.end()) {
            ++rep.dropped_trade_types[r.trade_type];
            continue;
        }
        out.push_back(std::move(r));
    }
    rep.kept = out.size();
    if (report) *report = rep;
    return out;
}

std::vector<TaqRecord> compact(const std::vector<TaqRecord>& records) {
    std::vector<TaqRecord> sorted = records;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
    std::vector<TaqRecord> out;
    out.reserve(sorted.size());
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j].timestamp == sorted[i].timestamp) ++j;
        const TaqRecord* quote = nullptr;
        std::vector<std::vector<const TaqRecord*>> groups;
        for (std::size_t k = i; k < j; ++k) {
            const TaqRecord& r = sorted[k];
            if (r.kind == RecordKind::Quote) {
                quote = &r;
                continue;
            }
            auto g = std::find_if(groups.begin(), groups.end(),
                                  [&](const auto& grp) { return grp.front()->trade_type == r.trade_type; });
            if (g == groups.end()) groups.push_back({&r});
            else g->push_back(&r);
        }
        if (quote) out.push_back(*quote);
        for (const auto& grp : groups) {
            if (grp.size() == 1) {
                out.push_back(*grp.front());
                continue;
            }
            TaqRecord merged = *grp.front();
            double vol = 0.0, notional = 0.0;
            for (const TaqRecord* r : grp) {
                vol += r->volume;
                notional += r->price * r->volume;
            }
            merged.volume = vol;
            merged.price = notional / vol;
            out.push_back(merged);
        }
        i = j;
    }
    return out;
}

double micro_price(const TaqRecord& quote) {
    const double total = quote.bid_vol + quote.ask_vol;
    if (!(total > 0.0)) throw DomainError("micro-price needs positive total quote volume");
    return (quote.ask_vol * quote.bid + quote.bid_vol * quote.ask) / total;
}

std::vector<std::pair<Millis, double>> micro_price_series(const std::vector<TaqRecord>& records) {
    std::vector<std::pair<Millis, double>> out;
    for (const auto& r : records)
        if (r.kind == RecordKind::Quote) out.emplace_back(r.timestamp, micro_price(r));
    return out;
}

std::vector<double> trade_prices(const std::vector<TaqRecord>& records) {
    std::vector<double> out;
    for (const auto& r : records)
        if (r.kind == RecordKind::Trade) out.push_back(r.price);
    return out;
}

}  // namespace clob
