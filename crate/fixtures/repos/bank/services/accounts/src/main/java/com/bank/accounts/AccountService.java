package com.bank.accounts;

public class AccountService {
    private final Account account = new Account();

    public long credit(long cents) {
        account.deposit(cents);
        return account.balance();
    }
}
