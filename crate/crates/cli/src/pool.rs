use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Maps `f` over `items` on `jobs` threads; results keep the input order.
/// `progress` sees each completion as `(done, total, index)`.
pub fn map_ordered<T, R, F, P>(items: &[T], jobs: usize, f: F, progress: P) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
    P: Fn(usize, usize, usize) + Sync,
{
    let next = AtomicUsize::new(0);
    let done = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    let worker = || loop {
        let i = next.fetch_add(1, Ordering::SeqCst);
        if i >= items.len() {
            break;
        }
        let r = f(&items[i]);
        slots.lock().expect("no worker panicked")[i] = Some(r);
        let k = done.fetch_add(1, Ordering::SeqCst) + 1;
        progress(k, items.len(), i);
    };
    let jobs = jobs.max(1).min(items.len().max(1));
    if jobs == 1 {
        worker();
    } else {
        std::thread::scope(|s| {
            for _ in 0..jobs {
                s.spawn(&worker);
            }
        });
    }
    slots
        .into_inner()
        .expect("no worker panicked")
        .into_iter()
        .map(|r| r.expect("every item processed"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_stable() {
        let items: Vec<u64> = (0..50).collect();
        let out = map_ordered(&items, 4, |&x| x * x, |_, _, _| {});
        assert_eq!(out, items.iter().map(|x| x * x).collect::<Vec<_>>());
    }
}
