package com.bank.payments;

public class Payment {
    private final String payee;
    private final long amountCents;

    public Payment(String payee, long amountCents) {
        this.payee = payee;
        this.amountCents = amountCents;
    }

    public long amount() {
        return amountCents;
    }
}
