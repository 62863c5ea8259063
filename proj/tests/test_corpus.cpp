#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>

#include "cjscope/corpus.hpp"

using namespace cjscope::corpus;

namespace {

const std::string listing = R"(<html><body>
<script src="./Welcome_files/coinhive.min.js"></script>
<script>
	var miner = new coinhive.Anonymous("owner key",
	    {throttle: 0.1});
		miner.start();
</script>
</body></html>)";

const CountRow& find(const std::vector<CountRow>& rows, std::string_view name) {
    auto it = std::find_if(rows.begin(), rows.end(), [&](const CountRow& r) { return r.name == name; });
    REQUIRE(it != rows.end());
    return *it;
}

}  // namespace

TEST_CASE("TLD classification") {
    CHECK(tld_of("google.com") == ".com");
    CHECK(tld_of("Example.CO.UK.") == ".uk");
    CHECK(tld_of("localhost").empty());
    CHECK(classify_tld(".com") == TldType::Generic);
    CHECK(classify_tld(".online") == TldType::Generic);
    CHECK(classify_tld(".site") == TldType::New);
    CHECK(classify_tld("si") == TldType::Country);
    CHECK(classify_tld(".BR") == TldType::Country);
    CHECK(classify_tld(".unheardof") == TldType::Generic);
}

TEST_CASE("script extraction") {
    const auto s = extract_scripts("<SCRIPT SRC='a.js'></SCRIPT><scripts>no</scripts><script type=x>body()</script>"
                                   "<script src=b.js async>");
    REQUIRE(s.size() == 3);
    CHECK(s[0].src == "a.js");
    CHECK(s[1].src.empty());
    CHECK(s[1].body == "body()");
    CHECK(s[2].src == "b.js");
    CHECK(extract_scripts("<p>no scripts here</p>").empty());
}

TEST_CASE("scan the listing snippet") {
    const auto db = SignatureDb::builtin();
    CHECK(db.version() == 3);
    const auto r = scan_html(listing, db, "welcome.si");
    CHECK(r.platform == "Coinhive");
    CHECK(r.currency == "Monero");
    CHECK(r.throttle == 0.1);
    CHECK(r.site_key == "owner key");
    CHECK(r.active);
    CHECK(r.tld == ".si");
    CHECK(r.tld_type == TldType::Country);

    SUBCASE("no scripts, no detection") {
        const auto clean = scan_html("<html><p>hi</p></html>", db);
        CHECK_FALSE(clean.platform);
        CHECK_FALSE(clean.active);
    }
    SUBCASE("key removed: detected but inactive") {
        std::string keyless = listing;
        keyless.replace(keyless.find("\"owner key\","), 12, "");
        const auto k = scan_html(keyless, db);
        CHECK(k.platform == "Coinhive");
        CHECK_FALSE(k.site_key);
        CHECK_FALSE(k.active);
        CHECK(k.throttle == 0.1);
    }
    SUBCASE("out-of-range throttle is ignored") {
        std::string t = listing;
        t.replace(t.find("0.1"), 3, "4.5");
        CHECK_FALSE(scan_html(t, db).throttle);
    }
}

TEST_CASE("platform priority and tag order") {
    const auto db = SignatureDb::builtin();
    // Authedmine is listed before Coinhive and wins when both appear
    const std::string both = synthetic_page("Coinhive", "aaaa", 0.5) + synthetic_page("Authedmine", "bbbb", 0.3);
    CHECK(scan_html(both, db).platform == "Authedmine");

    std::mt19937_64 rng(17);
    const std::vector<std::optional<std::string>> kinds{"Coinhive", "JSEcoin", "Miner", "Hashing", std::nullopt,
                                                        "deepMiner"};
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<ScriptTag> tags;
        for (int k = 0; k < 4; ++k) {
            const auto page = synthetic_page(kinds[rng() % kinds.size()], std::to_string(10000 + rng() % 9000),
                                             static_cast<double>(rng() % 10) / 10.0);
            for (auto& s : extract_scripts(page)) tags.push_back(std::move(s));
        }
        auto render = [](const std::vector<ScriptTag>& ts) {
            std::string html;
            for (const auto& t : ts) html += "<script" + t.attributes + ">" + t.body + "</script>\n";
            return html;
        };
        const auto base = scan_html(render(tags), db);
        for (int p = 0; p < 5; ++p) {
            std::shuffle(tags.begin(), tags.end(), rng);
            CHECK(scan_html(render(tags), db) == base);
        }
    }
}

TEST_CASE("every template matches exactly one signature") {
    const auto db = SignatureDb::builtin();
    for (const auto& sig : db.platforms()) {
        const auto page = synthetic_page(sig.platform, "12345", 0.3);
        const auto r = scan_html(page, db);
        CHECK(r.platform == sig.platform);
        CHECK(r.currency == sig.currency);
        CHECK(r.site_key == "12345");
        CHECK(r.throttle == 0.3);
        // no other signature matches on its own
        for (const auto& other : db.platforms()) {
            if (other.platform == sig.platform) continue;
            const SignatureDb alone(1, {other});
            CHECK_MESSAGE(!scan_html(page, alone).platform, sig.platform << " page also matches " << other.platform);
        }
        CHECK_FALSE(scan_html(synthetic_page(sig.platform, "", std::nullopt), db).active);
    }
    CHECK_FALSE(scan_html(synthetic_page(std::nullopt, "k", 0.5), db).platform);
}

TEST_CASE("signature db parsing") {
    CHECK_THROWS_AS(SignatureDb::from_json("{}"), std::invalid_argument);
    CHECK_THROWS_AS(SignatureDb::from_json(
                        R"J({"version":1,"platforms":[{"platform":"x","currency":"y","key":"(","throttle":"(a)"}]})J"),
                    std::invalid_argument);
    CHECK_THROWS_AS(SignatureDb::from_json(
                        R"J({"version":1,"platforms":[{"platform":"x","currency":"y","key":"a","throttle":"(a)"}]})J"),
                    std::invalid_argument);
    CHECK(SignatureDb::builtin().currency_of("JSEcoin") == "JSEcoin");
    CHECK_FALSE(SignatureDb::builtin().currency_of("Bitcoin"));
}

TEST_CASE("aggregate") {
    CHECK(aggregate({}).total == 0);
    CHECK(aggregate({}).tlds.empty());
    CHECK(aggregate({}).platforms.empty());

    const auto corpus = synthetic_corpus();
    REQUIRE(corpus.size() == 5703);
    const auto r = aggregate(corpus);
    CHECK(r.total == 5703);
    REQUIRE(r.tlds.size() == 11);
    CHECK(r.tlds[0].name == ".com");
    CHECK(r.tlds[0].count == 1945);
    CHECK(r.tlds[0].type == "generic");
    CHECK(r.tlds[1].name == ".net");
    CHECK(r.tlds[1].count == 359);
    CHECK(r.tlds.back().name == "others");
    CHECK(r.tlds.back().count == 1648);
    CHECK(find(r.tlds, ".site").type == "new");
    CHECK(find(r.tlds, ".si").type == "country");

    CHECK(find(r.platforms, "Coinhive").count == 4652);
    CHECK(find(r.platforms, "JSEcoin").count == 149);
    CHECK(find(r.currencies, "Monero").count == 4926);
    CHECK(find(r.currencies, std::string(no_cryptojacking)).count == 628);

    for (const auto* rows : {&r.tlds, &r.platforms, &r.currencies}) {
        double sum = 0;
        for (const auto& row : *rows) sum += row.percent;
        CHECK(sum == doctest::Approx(100).epsilon(1e-3));
    }
    // every detected platform carries its fixed currency
    const auto db = SignatureDb::builtin();
    for (const auto& rec : corpus)
        if (rec.platform) CHECK(rec.currency == db.currency_of(*rec.platform));
    CHECK(r.active < 5703 - 628);
    CHECK(r.active > 0);
}

TEST_CASE("aggregate is permutation invariant") {
    auto corpus = synthetic_corpus(5);
    const auto base = to_json(aggregate(corpus));
    std::mt19937_64 rng(1);
    for (int i = 0; i < 5; ++i) {
        std::shuffle(corpus.begin(), corpus.end(), rng);
        CHECK(to_json(aggregate(corpus)) == base);
    }
    CHECK(to_jsonl(synthetic_corpus(5)) == to_jsonl(synthetic_corpus(5)));
}

TEST_CASE("records round-trip through JSONL") {
    const auto corpus = synthetic_corpus(2);
    const std::vector<SiteRecord> head(corpus.begin(), corpus.begin() + 300);
    CHECK(records_from_jsonl(to_jsonl(head)) == head);
    CHECK_THROWS_AS(records_from_jsonl("{\"domain\":\"a.com\",\"tld_type\":\"weird\"}"), std::invalid_argument);
}

TEST_CASE("scan a directory") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "cjscope_corpus_test";
    fs::remove_all(dir);
    fs::create_directories(dir / "sub");
    std::ofstream(dir / "welcome.si.html") << listing;
    std::ofstream(dir / "sub" / "plain.com.htm") << "<html></html>";
    std::ofstream(dir / "notes.txt") << "ignored";
    const auto records = scan_directory(dir, SignatureDb::builtin(), 2);
    REQUIRE(records.size() == 2);
    CHECK(records[0].domain == "plain.com");
    CHECK_FALSE(records[0].platform);
    CHECK(records[1].domain == "welcome.si");
    CHECK(records[1].platform == "Coinhive");
    fs::remove_all(dir);
    CHECK_THROWS_AS(scan_directory(dir, SignatureDb::builtin()), std::invalid_argument);
}
