use wce_wasm_demo::{a1_series_text, d4_potential_text, generator_report_text};

#[test]
fn a1_series_lists_the_cubic_and_the_dilaton() {
    let out = a1_series_text(9).unwrap();
    assert!(out.contains("(1,0)^3"), "{out}");
    let cubic = out.lines().find(|l| l.contains("(1,0)^3 ") && l.trim_start().starts_with("3/2")).unwrap();
    assert!(cubic.contains("1/6") && cubic.ends_with("genus 0"), "{cubic}");
    let dilaton = out.lines().find(|l| l.contains(" (1,1) ")).unwrap();
    assert!(dilaton.contains("1/24") && dilaton.ends_with("genus 1"), "{dilaton}");
    assert!(a1_series_text(40).is_err());
}

#[test]
fn d4_potential_forms_match_their_references() {
    for form in ["paper", "dubrovin", "fjrw"] {
        let out = d4_potential_text(form).unwrap();
        assert!(out.contains("WDVV: true"), "{out}");
        assert!(out.contains("matches the reference exactly: true"), "{out}");
    }
    assert!(d4_potential_text("dubrovin").unwrap().contains("54/35"));
    assert!(d4_potential_text("cartesian").is_err());
}

#[test]
fn generator_report_shows_the_failing_printed_sextic() {
    let out = generator_report_text("D4", "builtin").unwrap();
    assert_eq!(out.matches("in W").count(), 3, "{out}");
    assert!(out.contains("w_4  degree 6") && out.contains("fails the screening check"), "{out}");
    let modes = generator_report_text("D4", "mode_construction").unwrap();
    assert_eq!(modes.matches("in W").count(), 4, "{modes}");
    assert!(generator_report_text("A3", "kernel_solve").unwrap().lines().skip(1).all(|l| l.ends_with("in W")));
    assert!(generator_report_text("E6", "kernel_solve").is_err());
}
