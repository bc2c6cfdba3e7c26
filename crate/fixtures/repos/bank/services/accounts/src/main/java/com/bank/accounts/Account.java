package com.bank.accounts;

public class Account {
    private long balanceCents;

    public void deposit(long cents) {
        balanceCents += cents;
    }

    public long balance() {
        return balanceCents;
    }
}
