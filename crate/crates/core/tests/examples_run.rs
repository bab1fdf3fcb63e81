macro_rules! example_test {
    ($module:ident, $test:ident, $file:literal) => {
        mod $module {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }

        #[test]
        fn $test() {
            $module::run_example().expect(concat!($file, " should run"));
        }
    };
}

example_test!(solve_example, solve_example_runs, "solve.rs");
example_test!(check_example, check_theorems_example_runs, "check_theorems.rs");
example_test!(improve_example, improve_example_runs, "improve.rs");
example_test!(strong_example, strong_certificate_example_runs, "strong_certificate.rs");
example_test!(robust_example, robust_defense_example_runs, "robust_defense.rs");
example_test!(kellerer_example, kellerer_example_runs, "kellerer.rs");
example_test!(connectivity_example, connectivity_example_runs, "connectivity.rs");
