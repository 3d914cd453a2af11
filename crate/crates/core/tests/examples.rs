// Runs the quick examples so they cannot rot. The training-heavy ones are
// exercised by the acceptance target instead.

macro_rules! example {
    ($name:ident, $file:literal) => {
        mod $name {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }

        #[test]
        fn $name() {
            $name::run_example().expect(concat!($file, " should run"));
        }
    };
}

example!(tokenize_and_encode, "tokenize_and_encode.rs");
example!(lexical_metrics, "lexical_metrics.rs");
example!(dqi_duplication_curve, "dqi_duplication_curve.rs");
example!(gradient_check, "gradient_check.rs");
example!(significance_tests, "significance_tests.rs");
example!(train_autoencoder, "train_autoencoder.rs");
example!(run_experiment, "run_experiment.rs");
