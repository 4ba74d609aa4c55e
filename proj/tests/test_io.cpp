#include <doctest.h>

#include <filesystem>

#include "spdckit/errors.hpp"
#include "spdckit/io.hpp"
#include "spdckit/qstate.hpp"
#include "spdckit/tomography.hpp"

using namespace spdckit;

TEST_CASE("tomography records CSV round-trip") {
    const auto truth = bell_state(BellLabel::PsiMinus);
    const auto records = simulate_counts(truth, default_settings(), 5e3, 11, 0.05);
    const auto back = records_from_csv(records_to_csv(records));
    REQUIRE(back.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(back[i].setting.arm1 == records[i].setting.arm1);
        CHECK(back[i].setting.arm2 == records[i].setting.arm2);
        CHECK(back[i].count == records[i].count);
        CHECK(back[i].pairs_per_setting == records[i].pairs_per_setting);
    }
}

TEST_CASE("records CSV diagnostics") {
    CHECK_THROWS_AS(records_from_csv("a,b,c\n"), ParseError);
    CHECK_THROWS_AS(records_from_csv("setting_arm1,setting_arm2,count,N\nH,V,-3,100\n"),
                    ParseError);
    CHECK_THROWS_AS(records_from_csv("setting_arm1,setting_arm2,count,N\nH,V,3.5,100\n"),
                    ParseError);
    CHECK_THROWS_AS(records_from_csv("setting_arm1,setting_arm2,count,N\nH,V,3,0\n"),
                    ParseError);
    CHECK_THROWS_AS(records_from_csv("setting_arm1,setting_arm2,count,N\nQ,V,3,10\n"),
                    DomainError);
    CHECK_THROWS_AS(records_from_csv("setting_arm1,setting_arm2,count,N\n"), ParseError);
}

TEST_CASE("atomic writes leave no temp file behind") {
    const auto dir = std::filesystem::temp_directory_path() / "spdckit-io-test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "out.txt";
    write_text_atomic(path, "payload");
    CHECK(read_text(path) == "payload");
    CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
    write_text_atomic(path, "replaced");
    CHECK(read_text(path) == "replaced");
    std::filesystem::remove_all(dir);
}
