/** Debounced latest-wins request scheduling.
 *
 * Contract: at most one request in flight; a burst of submissions
 * collapses to the newest one; responses older than the latest applied
 * one are discarded by sequence number, so the rendered state always
 * converges to the final control state.
 */

export const DEBOUNCE_MS = 50;

type Make<T> = () => Promise<T>;

export class RequestCoalescer<T> {
    private seq = 0;
    private lastApplied = 0;
    private inFlight = false;
    private queued: Make<T> | null = null;
    private timer: ReturnType<typeof setTimeout> | null = null;

    constructor(
        private readonly onResult: (value: T) => void,
        private readonly onError: (err: unknown) => void = () => undefined,
        private readonly debounceMs: number = DEBOUNCE_MS,
    ) {}

    /** Replace any pending request with this one. */
    submit(make: Make<T>): void {
        this.queued = make;
        if (!this.inFlight && this.timer === null) {
            this.timer = setTimeout(() => {
                this.timer = null;
                this.flush();
            }, this.debounceMs);
        }
        // while a request is in flight the queued one fires on settle
    }

    /** True if a request is in flight or pending. */
    get busy(): boolean {
        return this.inFlight || this.queued !== null || this.timer !== null;
    }

    private flush(): void {
        if (this.inFlight || this.queued === null) {
            return;
        }
        const make = this.queued;
        this.queued = null;
        const id = ++this.seq;
        this.inFlight = true;
        make().then(
            (value) => {
                this.inFlight = false;
                if (id > this.lastApplied) {
                    this.lastApplied = id;
                    this.onResult(value);
                }
                this.flush();
            },
            (err) => {
                this.inFlight = false;
                this.onError(err);
                this.flush();
            },
        );
    }
}
