use super::Error;

/// Maps free-form names ("Mild Fever", " skin_rash") to lowercase constants.
///
/// Runs of whitespace and hyphens collapse to one `_`; any other character
/// outside `[a-z0-9_]` is dropped after lowercasing.
pub fn normalize_symbol(raw: &str) -> Result<String, Error> {
    let mut out = String::with_capacity(raw.len());
    let mut in_separator = false;
    for c in raw.trim().chars().flat_map(char::to_lowercase) {
        if c.is_whitespace() || c == '-' {
            if !in_separator {
                out.push('_');
                in_separator = true;
            }
            continue;
        }
        in_separator = false;
        if c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' {
            out.push(c);
        }
    }

    match out.chars().next() {
        None => Err(Error::Normalize {
            raw: raw.to_owned(),
            reason: "empty after normalization",
        }),
        Some(c) if c.is_ascii_digit() => Err(Error::Normalize {
            raw: raw.to_owned(),
            reason: "starts with a digit",
        }),
        Some('_') => Err(Error::Normalize {
            raw: raw.to_owned(),
            reason: "starts with an underscore",
        }),
        Some(_) => Ok(out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn golden_cases() {
        assert_eq!(normalize_symbol(" Mild Fever ").unwrap(), "mild_fever");
        assert_eq!(normalize_symbol("loss_of_appetite").unwrap(), "loss_of_appetite");
        // "x-ray (chest)" -> "x_ray_(chest)" -> "x_ray_chest"
        assert_eq!(normalize_symbol("X-ray (chest)").unwrap(), "x_ray_chest");
        assert_eq!(normalize_symbol("Chicken pox").unwrap(), "chicken_pox");
        assert_eq!(normalize_symbol("a \t- -b").unwrap(), "a_b");
    }

    #[test]
    fn rejections() {
        assert!(normalize_symbol("   ").is_err());
        assert!(normalize_symbol("()").is_err());
        assert!(normalize_symbol("3rd degree").is_err());
        assert!(normalize_symbol("-dash").is_err());
    }

    proptest! {
        #[test]
        fn idempotent(raw in "\\PC{0,24}") {
            if let Ok(once) = normalize_symbol(&raw) {
                prop_assert_eq!(normalize_symbol(&once).unwrap(), once.clone());
                let ok = once.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_');
                prop_assert!(ok);
            }
        }
    }
}
