use proptest::prelude::*;

use rnl_cli::config::{parse_list, parse_range, KEYS};
use rnl_cli::parse_config;

fn with_file(text: String) -> impl Fn(&std::path::Path) -> std::io::Result<String> {
    move |_| Ok(text.clone())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn arbitrary_args_never_panic(args in proptest::collection::vec("\\PC{0,12}", 0..6)) {
        let _ = parse_config(&args, with_file(String::new()));
    }

    #[test]
    fn arbitrary_files_never_panic(text in "\\PC{0,300}") {
        let args = vec!["--config".to_string(), "f".to_string()];
        let _ = parse_config(&args, with_file(text));
    }

    #[test]
    fn known_keys_with_junk_values(k in 0..KEYS.len(), v in "\\PC{0,16}") {
        let text = format!("{}={v}\n", KEYS[k]);
        let args = vec!["--config".to_string(), "f".to_string()];
        if let Err(e) = parse_config(&args, with_file(text)) {
            prop_assert!(!e.to_string().contains("unknown key"), "{e}");
        }
    }

    #[test]
    fn lists_and_ranges(text in "[0-9:,.\\- ]{0,24}") {
        let _ = parse_list("N", &text);
        let _ = parse_range("s_range", &text);
    }
}
