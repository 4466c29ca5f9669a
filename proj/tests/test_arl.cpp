#include "doctest.h"

#include <random>

#include "cdn/arl.hpp"
#include "cdn/rand_util.hpp"

using namespace cdn;
using namespace cdn::arl;

namespace {

const char* kWorkedArl = "http://a836.g.akamaitech.net/7/836/123/e358f5db0045/www.foo.com/a.gif";

Errc parse_code(const std::string& s) {
    try {
        parse_arl(s);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected a parse error for ", s);
    return Errc::missing_segment;
}

std::string random_token(std::mt19937_64& rng, std::size_t len) {
    static const char alphabet[] = "abcdefghijklmnopqrstuvwxyz0123456789-_.";
    std::string out;
    for (std::size_t i = 0; i < len; ++i)
        out += alphabet[uniform_index(rng, sizeof(alphabet) - 1)];
    return out;
}

}  // namespace

TEST_CASE("the worked ARL parses into its six fields") {
    Arl a = parse_arl(kWorkedArl);
    CHECK(a.serial == "836");
    CHECK(a.akamai_domain == "g.akamaitech.net");
    CHECK(a.type_field == "7");
    CHECK(a.provider_code == "123");
    CHECK(a.object_data == "e358f5db0045");
    CHECK(a.absolute_url == "www.foo.com/a.gif");
    CHECK(serialize_arl(a) == kWorkedArl);  // byte-identical round trip
}

TEST_CASE("akamaize reproduces the worked ARL") {
    std::string arl = akamaize("http://www.foo.com/a.gif", "836", "g.akamaitech.net", "7",
                               "123", "e358f5db0045");
    CHECK(arl == kWorkedArl);
    // scheme-less origins work too
    CHECK(akamaize("www.foo.com/a.gif", "836", "g.akamaitech.net", "7", "123",
                   "e358f5db0045") == kWorkedArl);
}

TEST_CASE("parse errors are distinct") {
    CHECK(parse_code("https://a1.d.example/9/1/55/x/h/p") == Errc::scheme_mismatch);
    CHECK(parse_code("http://a1.d.example/9/2/55/x/h/p") == Errc::serial_mismatch);
    CHECK(parse_code("http://a1.d.example/9/1/55/x") == Errc::missing_segment);
    CHECK(parse_code("http://a1.d.example/9/1/55/x/hostonly") == Errc::missing_segment);
    CHECK(parse_code("http://b1.d.example/9/1/55/x/h/p") == Errc::malformed_host);
    CHECK(parse_code("http://a1x.d.example/9/1/55/x/h/p") == Errc::malformed_host);
    CHECK(parse_code("http://a1.d.example") == Errc::missing_segment);

    // the lenient flag tolerates a serial mismatch and keeps the host serial
    Arl lenient = parse_arl("http://a1.d.example/9/2/55/x/h/p", true);
    CHECK(lenient.serial == "1");
}

TEST_CASE("absolute_url keeps everything after the fifth slash verbatim") {
    Arl a = parse_arl("http://a4.d.net/t/4/p/o/host.com/deep/path/with?q=/slashes");
    CHECK(a.absolute_url == "host.com/deep/path/with?q=/slashes");
    CHECK(serialize_arl(a) == "http://a4.d.net/t/4/p/o/host.com/deep/path/with?q=/slashes");
}

TEST_CASE("akamaize validates its fields") {
    CHECK_THROWS_AS(akamaize("http://h/p", "", "d.net", "7", "1", "o"), Error);
    CHECK_THROWS_AS(akamaize("http://h/p", "8x6", "d.net", "7", "1", "o"), Error);
    CHECK_THROWS_AS(akamaize("http://h/p", "8", "d.net", "", "1", "o"), Error);
    CHECK_THROWS_AS(akamaize("http://h/p", "8", "d.net", "7", "1", "o/c"), Error);
    CHECK_THROWS_AS(akamaize("http://hostonly", "8", "d.net", "7", "1", "o"), Error);
    CHECK_THROWS_AS(akamaize("http:///path", "8", "d.net", "7", "1", "o"), Error);
}

TEST_CASE("object_data is opaque: changing it changes nothing else") {
    Arl a = parse_arl(kWorkedArl);
    std::string other =
        akamaize("http://www.foo.com/a.gif", a.serial, a.akamai_domain, a.type_field,
                 a.provider_code, "0123456789ab");
    CHECK(other != kWorkedArl);
    Arl b = parse_arl(other);
    CHECK(b.object_data == "0123456789ab");
    b.object_data = a.object_data;
    CHECK(b == a);
}

TEST_CASE("random field tuples round-trip through akamaize and parse") {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 1000; ++i) {
        std::string serial = std::to_string(uniform_index(rng, 100000));
        std::string domain = random_token(rng, 3) + "." + random_token(rng, 8) + ".net";
        std::string type = random_token(rng, 1 + uniform_index(rng, 3));
        std::string provider = std::to_string(uniform_index(rng, 10000));
        std::string object_data = random_token(rng, 12);
        std::string host = random_token(rng, 6) + ".com";
        std::string path = random_token(rng, 5);
        if (uniform_index(rng, 2)) path += "/" + random_token(rng, 4);
        std::string origin = "http://" + host + "/" + path;

        std::string arl = akamaize(origin, serial, domain, type, provider, object_data);
        Arl parsed = parse_arl(arl);
        CHECK(parsed.serial == serial);
        CHECK(parsed.akamai_domain == domain);
        CHECK(parsed.type_field == type);
        CHECK(parsed.provider_code == provider);
        CHECK(parsed.object_data == object_data);
        CHECK(parsed.absolute_url == host + "/" + path);
        CHECK(serialize_arl(parsed) == arl);
    }
}
